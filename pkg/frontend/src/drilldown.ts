// Per-focal drill-down: the full posterior with log-likelihood diagnostics.

import { probabilityColor, textColorFor } from "./color.js";
import { formatProbability } from "./heatmap.js";
import type { PosteriorResponse } from "./types.js";

export function formatLogLik(value: number | null): string {
  return value === null ? "-inf" : value.toFixed(3);
}

export function renderPosteriorDetail(post: PosteriorResponse): string {
  const rows = post.rows
    .map(
      (row) =>
        `<tr><td>${row.source}</td><td>${row.kind}</td>` +
        `<td class="prob" style="background:${probabilityColor(row.probability)};` +
        `color:${textColorFor(row.probability)}">${formatProbability(row.probability)}</td>` +
        `<td class="loglik">${formatLogLik(row.log_likelihood)}</td></tr>`,
    )
    .join("");
  const toggles = (["genetics", "locations", "admissions"] as const)
    .map((key) => `${key}: ${post.toggles[key] ? "on" : "off"}`)
    .join(", ");
  return (
    `<h4>focal ${post.focal} <small>(revision ${post.revision}; onsets on, ${toggles})</small></h4>` +
    `<table class="detail"><thead><tr><th>source</th><th>kind</th><th>probability</th>` +
    `<th>log likelihood</th></tr></thead><tbody>${rows}</tbody></table>` +
    `<p class="noso">nosocomial: <strong>${formatProbability(post.nosocomial)}</strong></p>`
  );
}
