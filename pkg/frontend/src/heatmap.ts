// Heatmap model and renderer for the all-focal summary matrix.
//
// The model copies probabilities verbatim from the API body; the only
// arithmetic here is consistency checking (row normalization and the
// nosocomial = 1 - community identity), which flags rather than fixes.

import { probabilityColor, textColorFor } from "./color.js";
import type { SummaryResponse } from "./types.js";

export const PROBABILITY_DECIMALS = 3;
const CHECK_TOLERANCE = 1e-6;

export function formatProbability(value: number): string {
  return value.toFixed(PROBABILITY_DECIMALS);
}

export interface HeatmapCell {
  row: string;
  column: string;
  /** Verbatim API value; null for the focal's own column. */
  value: number | null;
  display: string;
  color: string | null;
  textColor: string | null;
}

export interface HeatmapModel {
  revision: number;
  rows: string[];
  columns: string[];
  cells: HeatmapCell[][];
  /** Consistency problems in the received matrix, empty when healthy. */
  issues: string[];
}

export function buildHeatmapModel(summary: SummaryResponse): HeatmapModel {
  const issues: string[] = [];
  const nosoIndex = summary.columns.indexOf("nosocomial");
  const communityIndex = summary.columns.indexOf("community");

  const cells = summary.rows.map((rowId, i) =>
    summary.columns.map((column, j) => {
      const value = summary.values[i][j];
      return {
        row: rowId,
        column,
        value,
        display: value === null ? "–" : formatProbability(value),
        color: value === null ? null : probabilityColor(value),
        textColor: value === null ? null : textColorFor(value),
      };
    }),
  );

  summary.rows.forEach((rowId, i) => {
    const row = summary.values[i];
    let total = 0;
    row.forEach((value, j) => {
      if (j !== nosoIndex && value !== null) total += value;
    });
    if (Math.abs(total - 1) > CHECK_TOLERANCE) {
      issues.push(`row ${rowId}: source probabilities sum to ${total.toFixed(9)}, not 1`);
    }
    const community = row[communityIndex];
    const noso = row[nosoIndex];
    if (community !== null && noso !== null && Math.abs(noso - (1 - community)) > CHECK_TOLERANCE) {
      issues.push(`row ${rowId}: nosocomial ${noso.toFixed(9)} != 1 - community`);
    }
  });

  return { revision: summary.revision, rows: summary.rows, columns: summary.columns, cells, issues };
}

export function renderHeatmap(model: HeatmapModel): string {
  const header = model.columns
    .map((column) => `<th scope="col" class="${column === "nosocomial" ? "noso-col" : ""}">${column}</th>`)
    .join("");
  const body = model.cells
    .map((cells, i) => {
      const rowId = model.rows[i];
      const rendered = cells
        .map((cell) => {
          if (cell.value === null) {
            return `<td class="cell self" data-row="${cell.row}" data-col="${cell.column}">${cell.display}</td>`;
          }
          return (
            `<td class="cell" data-row="${cell.row}" data-col="${cell.column}" ` +
            `style="background:${cell.color};color:${cell.textColor}">${cell.display}</td>`
          );
        })
        .join("");
      return `<tr><th scope="row"><button class="focal-link" data-focal="${rowId}">${rowId}</button></th>${rendered}</tr>`;
    })
    .join("");
  const warnings = model.issues.length
    ? `<p class="issues">${model.issues.map((issue) => `⚠ ${issue}`).join("<br>")}</p>`
    : "";
  return (
    `<table class="heatmap"><thead><tr><th>focal ↓ source →</th>${header}</tr></thead>` +
    `<tbody>${body}</tbody></table>${warnings}`
  );
}
