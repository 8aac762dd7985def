// Application wiring: ward selection, data entry, heatmap, drill-down,
// ablation stepper, prior slider, and data-source toggles. Edits are never
// optimistic: every write round-trips through the API and the view reloads
// from the returned revision.

import { ApiClient, ApiError, RevisionConflictError } from "./api.js";
import { renderStepper, stageCount } from "./ablation.js";
import { renderPosteriorDetail } from "./drilldown.js";
import { parseConfigLines, parseLocationLines } from "./forms.js";
import { buildHeatmapModel, renderHeatmap } from "./heatmap.js";
import type { AblationResponse, Prior, Toggles } from "./types.js";

interface AppState {
  api: ApiClient;
  wardId: string | null;
  revision: number | null;
  toggles: Toggles;
  prior: Prior;
  focal: string | null;
  ablation: AblationResponse | null;
  ablationIndex: number;
  order: string[];
}

const state: AppState = {
  api: new ApiClient("http://127.0.0.1:8470"),
  wardId: null,
  revision: null,
  toggles: { onsets: true, genetics: true, locations: true, admissions: true },
  prior: { mode: "uniform" },
  focal: null,
  ablation: null,
  ablationIndex: 0,
  order: ["genetics", "locations", "admissions"],
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(message: string, kind: "info" | "error" | "conflict" = "info"): void {
  const banner = el<HTMLDivElement>("status");
  banner.textContent = message;
  banner.className = `status ${kind}`;
  banner.hidden = message === "";
}

function showError(error: unknown): void {
  if (error instanceof RevisionConflictError) {
    setStatus(
      "This ward changed in another session — the view has been reloaded; please re-apply your edit.",
      "conflict",
    );
    void refreshAll();
    return;
  }
  if (error instanceof ApiError) {
    setStatus(error.detail(), "error");
    return;
  }
  setStatus(String(error), "error");
}

function queryOptions() {
  return { toggles: state.toggles, prior: state.prior };
}

async function refreshWardList(): Promise<void> {
  const { wards } = await state.api.listWards();
  const select = el<HTMLSelectElement>("ward-select");
  select.innerHTML = wards
    .map((w) => `<option value="${w.ward_id}">${w.ward_id} (rev ${w.revision}, ${w.cases} cases)</option>`)
    .join("");
  if (state.wardId && wards.some((w) => w.ward_id === state.wardId)) {
    select.value = state.wardId;
  } else {
    state.wardId = wards.length > 0 ? wards[0].ward_id : null;
  }
}

async function refreshHeatmap(): Promise<void> {
  const container = el<HTMLDivElement>("heatmap");
  if (!state.wardId) {
    container.innerHTML = "<p>No ward selected.</p>";
    return;
  }
  const summary = await state.api.summary(state.wardId, queryOptions());
  state.revision = summary.revision;
  el<HTMLSpanElement>("revision").textContent = `revision ${summary.revision}`;
  if (summary.rows.length === 0) {
    container.innerHTML = "<p>No cases yet — add one below.</p>";
    return;
  }
  const model = buildHeatmapModel(summary);
  container.innerHTML = renderHeatmap(model);
  container.querySelectorAll<HTMLButtonElement>(".focal-link").forEach((button) => {
    button.addEventListener("click", () => {
      state.focal = button.dataset.focal ?? null;
      void refreshDrilldown();
      void refreshAblation();
    });
  });
}

async function refreshDrilldown(): Promise<void> {
  const container = el<HTMLDivElement>("drilldown");
  if (!state.wardId || !state.focal) {
    container.innerHTML = "<p>Pick a focal case in the heatmap.</p>";
    return;
  }
  try {
    const post = await state.api.posterior(state.wardId, state.focal, queryOptions());
    container.innerHTML = renderPosteriorDetail(post);
  } catch (error) {
    showError(error);
  }
}

async function refreshAblation(): Promise<void> {
  const container = el<HTMLDivElement>("ablation");
  if (!state.wardId || !state.focal) {
    container.innerHTML = "<p>Pick a focal case to replay data sources.</p>";
    return;
  }
  try {
    state.ablation = await state.api.ablation(state.wardId, state.focal, state.order, {
      prior: state.prior,
    });
    state.ablationIndex = 0;
    renderAblation();
  } catch (error) {
    showError(error);
  }
}

function renderAblation(): void {
  const container = el<HTMLDivElement>("ablation");
  if (!state.ablation) return;
  container.innerHTML = renderStepper(state.ablation, state.ablationIndex);
  const prev = document.getElementById("stage-prev");
  const next = document.getElementById("stage-next");
  prev?.addEventListener("click", () => {
    state.ablationIndex = Math.max(0, state.ablationIndex - 1);
    renderAblation();
  });
  next?.addEventListener("click", () => {
    state.ablationIndex = Math.min(stageCount(state.ablation!) - 1, state.ablationIndex + 1);
    renderAblation();
  });
  container.querySelectorAll<HTMLButtonElement>(".crumb").forEach((button) => {
    button.addEventListener("click", () => {
      state.ablationIndex = Number(button.dataset.stage);
      renderAblation();
    });
  });
}

async function refreshAll(): Promise<void> {
  try {
    await refreshWardList();
    await refreshHeatmap();
    await refreshDrilldown();
    await refreshAblation();
  } catch (error) {
    showError(error);
  }
}

function wireControls(): void {
  el<HTMLButtonElement>("connect").addEventListener("click", () => {
    const base = el<HTMLInputElement>("base-url").value.replace(/\/+$/, "");
    const token = el<HTMLInputElement>("token").value || undefined;
    state.api = new ApiClient(base, token);
    setStatus("");
    void refreshAll();
  });

  el<HTMLSelectElement>("ward-select").addEventListener("change", (event) => {
    state.wardId = (event.target as HTMLSelectElement).value;
    state.focal = null;
    void refreshAll();
  });

  el<HTMLButtonElement>("ward-create").addEventListener("click", async () => {
    try {
      const name = el<HTMLInputElement>("ward-new-id").value.trim();
      const created = await state.api.createWard(name || undefined);
      state.wardId = created.ward_id;
      setStatus(`created ward ${created.ward_id}`);
      await refreshAll();
    } catch (error) {
      showError(error);
    }
  });

  for (const key of ["genetics", "locations", "admissions"] as const) {
    el<HTMLInputElement>(`toggle-${key}`).addEventListener("change", (event) => {
      state.toggles = { ...state.toggles, [key]: (event.target as HTMLInputElement).checked };
      void refreshHeatmap();
      void refreshDrilldown();
    });
  }

  const priorMode = el<HTMLInputElement>("prior-uniform");
  const priorSlider = el<HTMLInputElement>("prior-p");
  const priorLabel = el<HTMLSpanElement>("prior-p-label");
  const applyPrior = () => {
    if (priorMode.checked) {
      state.prior = { mode: "uniform" };
      priorSlider.disabled = true;
    } else {
      priorSlider.disabled = false;
      state.prior = { mode: "nosocomial-split", p: Number(priorSlider.value) };
    }
    priorLabel.textContent = priorMode.checked ? "uniform" : `p(nosocomial) = ${priorSlider.value}`;
    void refreshHeatmap();
    void refreshDrilldown();
    void refreshAblation();
  };
  priorMode.addEventListener("change", applyPrior);
  priorSlider.addEventListener("change", applyPrior);

  el<HTMLSelectElement>("ablation-order").addEventListener("change", (event) => {
    state.order = (event.target as HTMLSelectElement).value.split(",");
    void refreshAblation();
  });

  el<HTMLFormElement>("case-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.wardId) return;
    try {
      const id = el<HTMLInputElement>("case-id").value.trim();
      await state.api.upsertCase(
        state.wardId,
        id,
        {
          onset_date: el<HTMLInputElement>("case-onset").value,
          admission_date: el<HTMLInputElement>("case-admission").value || null,
          sample_date: el<HTMLInputElement>("case-sample").value || null,
        },
        state.revision ?? undefined,
      );
      setStatus(`saved case ${id}`);
      await refreshAll();
    } catch (error) {
      showError(error);
    }
  });

  el<HTMLFormElement>("locations-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.wardId) return;
    try {
      const rows = parseLocationLines(el<HTMLTextAreaElement>("locations-text").value);
      const result = await state.api.upsertLocations(state.wardId, rows, state.revision ?? undefined);
      setStatus(`saved ${result.rows} location rows`);
      await refreshAll();
    } catch (error) {
      showError(error);
    }
  });

  el<HTMLFormElement>("fasta-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.wardId) return;
    try {
      const result = await state.api.uploadFasta(
        state.wardId,
        el<HTMLTextAreaElement>("fasta-text").value,
        state.revision ?? undefined,
      );
      setStatus(`stored ${result.sequences} sequences`);
      await refreshAll();
    } catch (error) {
      showError(error);
    }
  });

  el<HTMLFormElement>("params-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    if (!state.wardId) return;
    try {
      const config = parseConfigLines(el<HTMLTextAreaElement>("params-text").value);
      await state.api.setParams(state.wardId, config, state.revision ?? undefined);
      setStatus("parameters updated");
      await refreshAll();
    } catch (error) {
      showError(error);
    }
  });
}

document.addEventListener("DOMContentLoaded", () => {
  wireControls();
  void refreshAll();
});
