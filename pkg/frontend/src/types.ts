// Shapes of the /v1 API payloads. The dashboard never derives probabilities
// itself: every number rendered comes verbatim from one of these bodies.

export interface Toggles {
  onsets: boolean;
  genetics: boolean;
  locations: boolean;
  admissions: boolean;
}

export interface PriorDescription {
  mode: "uniform" | "nosocomial-split";
  p_nosocomial?: number;
}

export interface PosteriorRow {
  source: string;
  kind: "candidate" | "hospital" | "community";
  probability: number;
  /** Natural-log likelihood; null encodes an impossible hypothesis (-inf). */
  log_likelihood: number | null;
}

export interface PosteriorResponse {
  revision: number;
  focal: string;
  candidates: string[];
  rows: PosteriorRow[];
  nosocomial: number;
  toggles: Toggles;
  prior: PriorDescription;
}

export interface SummaryResponse {
  revision: number;
  rows: string[];
  columns: string[];
  values: (number | null)[][];
}

export interface AblationStage {
  stage: string;
  toggles: Toggles;
  rows: PosteriorRow[];
  nosocomial: number;
  delta_vs_previous: Record<string, number> | null;
}

export interface AblationResponse {
  revision: number;
  focal: string;
  order: string[];
  stages: AblationStage[];
}

export interface WardInfo {
  ward_id: string;
  revision: number;
  cases: number;
}

export interface CaseDetail {
  id: string;
  onset_date: string | null;
  admission_date: string | null;
  sample_date: string | null;
  has_sequence: boolean;
  location_days: number;
}

export interface WardDetail {
  ward_id: string;
  revision: number;
  cases: CaseDetail[];
  params: unknown;
  config: Record<string, string>;
  warnings: string[];
}

export interface LocationRow {
  id: string;
  date: string;
  location_code: string;
}

export interface CaseFields {
  onset_date: string;
  admission_date?: string | null;
  sample_date?: string | null;
}

export type Prior =
  | { mode: "uniform" }
  | { mode: "nosocomial-split"; p: number };

export function priorParam(prior: Prior): string {
  return prior.mode === "uniform" ? "uniform" : `noso:${prior.p}`;
}
