import { describe, expect, it } from "vitest";

import { parseForceCsv, renderTraceChart } from "../src/tracechart.js";
import type { TrialAnalysis } from "../src/model.js";

function pulseCsv(): string {
  const lines = ["t_s,voltage_v"];
  for (let i = 0; i <= 400; i++) {
    const t = i / 2000;
    const v = t >= 0.15 && t < 0.16 ? 3.0 * Math.sin((Math.PI * (t - 0.15)) / 0.01) ** 2 : 0.0;
    lines.push(`${t.toFixed(6)},${v.toFixed(6)}`);
  }
  return lines.join("\n") + "\n";
}

const ANALYSIS: TrialAnalysis = {
  peak_force_n: 60.0,
  f_theoretical_n: 70.0,
  error_pct: 16.7,
  signature: "intact",
  kin_summary: { p_rest_mm: 690.489, p_lowest_mm: 687.429, d_stop_mm: 3.06, v_max_mm_s: 860.634 },
};

describe("parseForceCsv", () => {
  it("converts baseline-corrected volts to newtons", () => {
    const points = parseForceCsv(pulseCsv());
    expect(points.length).toBe(401);
    const peak = Math.max(...points.map((p) => p.force));
    expect(peak).toBeCloseTo(60.0, 5); // 3.0 V * 20 N/V
  });

  it("rejects wrong headers", () => {
    expect(() => parseForceCsv("time,volts\n0,0\n")).toThrow(/header/);
  });
});

describe("renderTraceChart", () => {
  it("marks the peak and shows the classifier badge", () => {
    const svg = renderTraceChart(parseForceCsv(pulseCsv()), ANALYSIS);
    expect(svg).toContain('circle class="peak"');
    expect(svg).toContain("60 N");
    expect(svg).toContain("classifier: intact");
    expect(svg).not.toContain("disagree");
  });

  it("flags operator disagreement visibly", () => {
    const svg = renderTraceChart(parseForceCsv(pulseCsv()), ANALYSIS, {
      operatorOutcome: "broke",
    });
    expect(svg).toContain("badge disagree");
    expect(svg).toContain("(operator: broke)");
  });

  it("renders the verdict verbatim without operator context", () => {
    const svg = renderTraceChart(
      parseForceCsv(pulseCsv()),
      { ...ANALYSIS, signature: "uncertain" },
      { operatorOutcome: "intact" },
    );
    expect(svg).toContain("classifier: uncertain");
    expect(svg).not.toContain("disagree");
  });
});
