// Force-time SVG chart: baseline, detected peak marker, and the classifier
// verdict badge. Renders the server's analysis result verbatim; when the
// classifier disagrees with the operator outcome the badge is flagged.

import type { TrialAnalysis } from "./model.js";
import { gformat } from "./model.js";

export interface TracePoint {
  t: number;
  force: number;
}

/** Parse a `t_s,voltage_v` CSV into force samples (N) above baseline. */
export function parseForceCsv(csv: string, voltsToNewtons = 20.0): TracePoint[] {
  const lines = csv.trim().split("\n");
  if (lines[0] !== "t_s,voltage_v") {
    throw new Error(`expected force CSV header, got ${lines[0]}`);
  }
  const raw = lines.slice(1).map((line) => {
    const [t, v] = line.split(",").map(Number);
    return { t, v };
  });
  const head = raw.filter((p) => p.t <= raw[0].t + 0.1).map((p) => p.v);
  const baseline = head.sort((a, b) => a - b)[Math.floor(head.length / 2)] ?? 0;
  return raw.map((p) => ({ t: p.t, force: (p.v - baseline) * voltsToNewtons }));
}

export interface ChartOptions {
  width?: number;
  height?: number;
  operatorOutcome?: "intact" | "broke" | null;
}

export function renderTraceChart(
  points: TracePoint[],
  analysis: TrialAnalysis | null,
  options: ChartOptions = {},
): string {
  const width = options.width ?? 640;
  const height = options.height ?? 240;
  const pad = 34;
  if (points.length < 2) return `<svg class="trace-chart" width="${width}" height="${height}"></svg>`;

  const tMin = points[0].t;
  const tMax = points[points.length - 1].t;
  const fMax = Math.max(...points.map((p) => p.force), 1e-9);
  const fMin = Math.min(...points.map((p) => p.force), 0);
  const x = (t: number) => pad + ((t - tMin) / (tMax - tMin)) * (width - 2 * pad);
  const y = (f: number) => height - pad - ((f - fMin) / (fMax - fMin)) * (height - 2 * pad);

  const path = points.map((p, i) => `${i ? "L" : "M"}${x(p.t).toFixed(1)},${y(p.force).toFixed(1)}`).join("");
  const peak = points.reduce((best, p) => (p.force > best.force ? p : best), points[0]);

  let badge = "";
  if (analysis !== null) {
    const disagree =
      options.operatorOutcome != null &&
      analysis.signature !== "uncertain" &&
      (analysis.signature === "broke") !== (options.operatorOutcome === "broke");
    const cls = disagree ? "badge disagree" : "badge";
    const text = disagree
      ? `classifier: ${analysis.signature} (operator: ${options.operatorOutcome})`
      : `classifier: ${analysis.signature}`;
    badge = `<text class="${cls}" x="${width - pad}" y="${pad - 14}" text-anchor="end">${text}</text>`;
  }

  return (
    `<svg class="trace-chart" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">` +
    `<line class="baseline" x1="${pad}" y1="${y(0)}" x2="${width - pad}" y2="${y(0)}" stroke-dasharray="4 3"/>` +
    `<path class="force" d="${path}" fill="none"/>` +
    `<circle class="peak" cx="${x(peak.t).toFixed(1)}" cy="${y(peak.force).toFixed(1)}" r="4"/>` +
    `<text class="peak-label" x="${x(peak.t).toFixed(1)}" y="${(y(peak.force) - 8).toFixed(1)}" text-anchor="middle">` +
    `${gformat(Number(peak.force.toFixed(1)))} N</text>` +
    badge +
    `</svg>`
  );
}
