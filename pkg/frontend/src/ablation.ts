// Ablation stepper: replay the posterior as data sources are added one at
// a time, with per-source deltas against the previous stage.

import { probabilityColor, textColorFor } from "./color.js";
import { formatProbability } from "./heatmap.js";
import type { AblationResponse, AblationStage } from "./types.js";

export function stageCount(response: AblationResponse): number {
  return response.stages.length;
}

export function stageAt(response: AblationResponse, index: number): AblationStage {
  if (index < 0 || index >= response.stages.length) {
    throw new RangeError(`stage index ${index} out of range`);
  }
  return response.stages[index];
}

export function stageLabel(stage: AblationStage): string {
  const enabled = (["genetics", "locations", "admissions"] as const).filter(
    (key) => stage.toggles[key],
  );
  return enabled.length === 0 ? "onsets only" : `onsets + ${enabled.join(" + ")}`;
}

function deltaBadge(delta: number | undefined): string {
  if (delta === undefined) return "";
  const cls = delta > 1e-12 ? "up" : delta < -1e-12 ? "down" : "flat";
  const sign = delta > 0 ? "+" : "";
  return `<span class="delta ${cls}">${sign}${formatProbability(delta)}</span>`;
}

export function renderStage(stage: AblationStage): string {
  const rows = stage.rows
    .map((row) => {
      const delta = stage.delta_vs_previous?.[row.source];
      return (
        `<tr><td>${row.source}</td><td>${row.kind}</td>` +
        `<td class="prob" style="background:${probabilityColor(row.probability)};` +
        `color:${textColorFor(row.probability)}">${formatProbability(row.probability)}</td>` +
        `<td>${deltaBadge(delta)}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="stage"><thead><tr><th>source</th><th>kind</th><th>probability</th>` +
    `<th>Δ vs previous</th></tr></thead><tbody>${rows}</tbody></table>` +
    `<p class="noso">nosocomial: <strong>${formatProbability(stage.nosocomial)}</strong></p>`
  );
}

export function renderStepper(response: AblationResponse, index: number): string {
  const stage = stageAt(response, index);
  const crumbs = response.stages
    .map((s, i) => {
      const cls = i === index ? "crumb active" : "crumb";
      return `<button class="${cls}" data-stage="${i}">${i === 0 ? "onsets" : `+${s.stage}`}</button>`;
    })
    .join(" → ");
  return (
    `<div class="stepper-nav">` +
    `<button id="stage-prev" ${index === 0 ? "disabled" : ""}>←</button> ${crumbs} ` +
    `<button id="stage-next" ${index === response.stages.length - 1 ? "disabled" : ""}>→</button>` +
    `</div><h4>${stageLabel(stage)}</h4>${renderStage(stage)}`
  );
}
