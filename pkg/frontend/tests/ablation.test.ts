import { describe, expect, it } from "vitest";

import { renderStage, renderStepper, stageAt, stageLabel } from "../src/ablation.js";
import type { AblationResponse } from "../src/types.js";

const RESPONSE: AblationResponse = {
  revision: 3,
  focal: "P2",
  order: ["genetics", "locations", "admissions"],
  stages: [
    {
      stage: "onsets",
      toggles: { onsets: true, genetics: false, locations: false, admissions: false },
      rows: [
        { source: "P1", kind: "candidate", probability: 0.4, log_likelihood: -3.1 },
        { source: "hospital", kind: "hospital", probability: 0.3, log_likelihood: -3.4 },
        { source: "community", kind: "community", probability: 0.3, log_likelihood: -3.4 },
      ],
      nosocomial: 0.7,
      delta_vs_previous: null,
    },
    {
      stage: "genetics",
      toggles: { onsets: true, genetics: true, locations: false, admissions: false },
      rows: [
        { source: "P1", kind: "candidate", probability: 0.8, log_likelihood: -5.0 },
        { source: "hospital", kind: "hospital", probability: 0.1, log_likelihood: -7.1 },
        { source: "community", kind: "community", probability: 0.1, log_likelihood: -7.1 },
      ],
      nosocomial: 0.9,
      delta_vs_previous: { P1: 0.4, hospital: -0.2, community: -0.2 },
    },
  ],
};

describe("stage access", () => {
  it("selects stages by index and rejects out-of-range steps", () => {
    expect(stageAt(RESPONSE, 0).stage).toBe("onsets");
    expect(stageAt(RESPONSE, 1).stage).toBe("genetics");
    expect(() => stageAt(RESPONSE, 2)).toThrow(RangeError);
    expect(() => stageAt(RESPONSE, -1)).toThrow(RangeError);
  });

  it("labels stages by what is enabled", () => {
    expect(stageLabel(RESPONSE.stages[0])).toBe("onsets only");
    expect(stageLabel(RESPONSE.stages[1])).toBe("onsets + genetics");
  });
});

describe("renderStage", () => {
  it("shows verbatim probabilities at display precision", () => {
    const html = renderStage(RESPONSE.stages[1]);
    expect(html).toContain("0.800");
    expect(html).toContain("0.900"); // nosocomial
  });

  it("renders signed deltas with direction classes", () => {
    const html = renderStage(RESPONSE.stages[1]);
    expect(html).toContain('class="delta up"');
    expect(html).toContain("+0.400");
    expect(html).toContain('class="delta down"');
    expect(html).toContain("-0.200");
  });

  it("omits deltas on the first stage", () => {
    const html = renderStage(RESPONSE.stages[0]);
    expect(html).not.toContain('class="delta');
  });
});

describe("renderStepper", () => {
  it("marks the active crumb and disables ends", () => {
    const first = renderStepper(RESPONSE, 0);
    expect(first).toContain('id="stage-prev" disabled');
    expect(first).toContain('class="crumb active" data-stage="0"');
    const last = renderStepper(RESPONSE, 1);
    expect(last).toContain('id="stage-next" disabled');
  });
});
