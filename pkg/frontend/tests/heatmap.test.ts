import { describe, expect, it } from "vitest";

import { buildHeatmapModel, formatProbability, renderHeatmap } from "../src/heatmap.js";
import type { SummaryResponse } from "../src/types.js";

const SUMMARY: SummaryResponse = {
  revision: 7,
  rows: ["P1", "P2"],
  columns: ["P1", "P2", "hospital", "community", "nosocomial"],
  values: [
    [null, 0.123456789, 0.3, 0.576543211, 0.423456789],
    [0.25, null, 0.25, 0.5, 0.5],
  ],
};

describe("buildHeatmapModel", () => {
  it("copies API values verbatim and formats at fixed precision", () => {
    const model = buildHeatmapModel(SUMMARY);
    const cell = model.cells[0][1];
    expect(cell.value).toBe(0.123456789); // untouched
    expect(cell.display).toBe((0.123456789).toFixed(3));
    expect(model.cells[1][0].display).toBe("0.250");
    expect(model.revision).toBe(7);
  });

  it("renders the focal's own column as empty", () => {
    const model = buildHeatmapModel(SUMMARY);
    expect(model.cells[0][0].value).toBeNull();
    expect(model.cells[0][0].color).toBeNull();
    expect(model.cells[0][0].display).toBe("–");
  });

  it("accepts a consistent matrix without issues", () => {
    expect(buildHeatmapModel(SUMMARY).issues).toEqual([]);
  });

  it("flags rows whose source probabilities do not sum to one", () => {
    const broken: SummaryResponse = {
      ...SUMMARY,
      values: [
        [null, 0.1, 0.3, 0.5, 0.5], // sums to 0.9
        [0.25, null, 0.25, 0.5, 0.5],
      ],
    };
    const model = buildHeatmapModel(broken);
    expect(model.issues).toHaveLength(1);
    expect(model.issues[0]).toContain("P1");
    expect(model.issues[0]).toContain("sum");
  });

  it("flags a nosocomial cell that is not 1 - community", () => {
    const broken: SummaryResponse = {
      ...SUMMARY,
      values: [
        [null, 0.2, 0.3, 0.5, 0.42],
        [0.25, null, 0.25, 0.5, 0.5],
      ],
    };
    const model = buildHeatmapModel(broken);
    expect(model.issues.some((issue) => issue.includes("nosocomial"))).toBe(true);
  });

  it("tolerates sub-1e-6 wobble from serialization", () => {
    const wobbly: SummaryResponse = {
      ...SUMMARY,
      values: [
        [null, 0.1234567, 0.3, 0.5765433 + 4e-7, 0.4234567 - 4e-7],
        [0.25, null, 0.25, 0.5, 0.5],
      ],
    };
    expect(buildHeatmapModel(wobbly).issues).toEqual([]);
  });
});

describe("renderHeatmap", () => {
  it("emits one cell per row/column with data attributes", () => {
    const html = renderHeatmap(buildHeatmapModel(SUMMARY));
    expect(html).toContain('data-row="P1" data-col="P2"');
    expect(html).toContain('data-row="P2" data-col="nosocomial"');
    expect((html.match(/<td/g) ?? []).length).toBe(10);
    expect(html).toContain('class="focal-link" data-focal="P1"');
  });

  it("shows issues when the matrix is inconsistent", () => {
    const broken = buildHeatmapModel({
      ...SUMMARY,
      values: [
        [null, 0.0, 0.0, 0.0, 1.0],
        [0.25, null, 0.25, 0.5, 0.5],
      ],
    });
    const html = renderHeatmap(broken);
    expect(html).toContain("issues");
  });
});

describe("formatProbability", () => {
  it("uses three decimals everywhere", () => {
    expect(formatProbability(0)).toBe("0.000");
    expect(formatProbability(1)).toBe("1.000");
    expect(formatProbability(0.0005)).toBe("0.001");
  });
});
