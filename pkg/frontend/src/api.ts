// Thin typed client for the /v1 ward API. Conflicts (409) get their own
// error class so the UI can show the stale-revision banner instead of a
// generic failure.

import type {
  AblationResponse,
  CaseFields,
  LocationRow,
  PosteriorResponse,
  Prior,
  SummaryResponse,
  Toggles,
  WardDetail,
  WardInfo,
} from "./types.js";
import { priorParam } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: unknown,
    message?: string,
  ) {
    super(message ?? `API error ${status}`);
  }

  /** Field-level messages from a 400 validation body, if present. */
  fieldErrors(): { field: string | null; message: string }[] {
    const body = this.body as { errors?: { field: string | null; message: string }[] };
    return body && Array.isArray(body.errors) ? body.errors : [];
  }

  detail(): string {
    const body = this.body as { detail?: string };
    if (body && typeof body.detail === "string") return body.detail;
    const fields = this.fieldErrors();
    if (fields.length > 0) {
      return fields.map((e) => (e.field ? `${e.field}: ${e.message}` : e.message)).join("; ");
    }
    return this.message;
  }
}

export class RevisionConflictError extends ApiError {
  constructor(status: number, body: unknown) {
    super(status, body, "ward changed since this view was loaded");
  }
}

export interface QueryOptions {
  toggles?: Partial<Toggles>;
  prior?: Prior;
}

function queryString(focal: string | null, options: QueryOptions, extra: Record<string, string> = {}): string {
  const params = new URLSearchParams();
  if (focal !== null) params.set("focal", focal);
  const toggles = options.toggles ?? {};
  for (const key of ["genetics", "locations", "admissions"] as const) {
    if (toggles[key] !== undefined) params.set(key, String(toggles[key]));
  }
  if (options.prior) params.set("prior", priorParam(options.prior));
  for (const [key, value] of Object.entries(extra)) params.set(key, value);
  const rendered = params.toString();
  return rendered ? `?${rendered}` : "";
}

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly token?: string,
  ) {}

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown, form?: FormData): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(body !== undefined),
      body: form ?? (body !== undefined ? JSON.stringify(body) : undefined),
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : null;
    if (!response.ok) {
      if (response.status === 409) throw new RevisionConflictError(response.status, parsed);
      throw new ApiError(response.status, parsed);
    }
    return parsed as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/v1/health");
  }

  listWards(): Promise<{ wards: WardInfo[] }> {
    return this.request("GET", "/v1/wards");
  }

  createWard(wardId?: string, config?: Record<string, string>): Promise<{ ward_id: string; revision: number }> {
    return this.request("POST", "/v1/wards", { ward_id: wardId ?? null, config: config ?? {} });
  }

  wardDetail(wardId: string): Promise<WardDetail> {
    return this.request("GET", `/v1/wards/${wardId}`);
  }

  upsertCase(
    wardId: string,
    caseId: string,
    fields: CaseFields,
    expectedRevision?: number,
  ): Promise<{ revision: number }> {
    return this.request("PUT", `/v1/wards/${wardId}/cases/${caseId}`, {
      ...fields,
      expected_revision: expectedRevision ?? null,
    });
  }

  upsertLocations(
    wardId: string,
    rows: LocationRow[],
    expectedRevision?: number,
  ): Promise<{ revision: number; rows: number }> {
    return this.request("POST", `/v1/wards/${wardId}/locations`, {
      rows,
      expected_revision: expectedRevision ?? null,
    });
  }

  uploadFasta(wardId: string, fastaText: string, expectedRevision?: number): Promise<{ revision: number; sequences: number }> {
    const form = new FormData();
    form.append("fasta", new Blob([fastaText], { type: "text/plain" }), "sequences.fasta");
    const suffix = expectedRevision === undefined ? "" : `?expected_revision=${expectedRevision}`;
    return this.request("POST", `/v1/wards/${wardId}/sequences${suffix}`, undefined, form);
  }

  setParams(wardId: string, config: Record<string, string>, expectedRevision?: number): Promise<{ revision: number }> {
    return this.request("PUT", `/v1/wards/${wardId}/params`, {
      config,
      expected_revision: expectedRevision ?? null,
    });
  }

  posterior(wardId: string, focal: string, options: QueryOptions = {}): Promise<PosteriorResponse> {
    return this.request("GET", `/v1/wards/${wardId}/posterior${queryString(focal, options)}`);
  }

  ablation(wardId: string, focal: string, order: string[], options: QueryOptions = {}): Promise<AblationResponse> {
    return this.request(
      "GET",
      `/v1/wards/${wardId}/ablation${queryString(focal, options, { order: order.join(",") })}`,
    );
  }

  summary(wardId: string, options: QueryOptions = {}): Promise<SummaryResponse> {
    return this.request("GET", `/v1/wards/${wardId}/summary${queryString(null, options)}`);
  }
}
