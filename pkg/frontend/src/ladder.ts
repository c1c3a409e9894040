// Ladder grid and result card: pure projections of the campaign snapshot.
// No breaking height/force is derived here; the result card displays the
// server's result verbatim, and grid cells use the same formatting as the
// server's exported CSV so the two match cell for cell.

import type { CampaignSnapshot, NextAction, Trial } from "./model.js";
import { gformat } from "./model.js";

export interface LadderCell {
  state: "intact" | "broke" | "pending";
  text: string; // peak in N, "N/A" for broke, "" for pending
  trialIndex: number | null;
  disagreement: boolean;
}

export interface LadderRow {
  heightCm: number;
  cells: LadderCell[];
  averageText: string; // mean surviving peak, "N/A" when none
}

/** Group trials by height (ascending) into trials_per_height slots. */
export function ladderRows(snapshot: CampaignSnapshot): LadderRow[] {
  const byHeight = new Map<number, Trial[]>();
  for (const trial of snapshot.trials) {
    const list = byHeight.get(trial.height_cm) ?? [];
    list.push(trial);
    byHeight.set(trial.height_cm, list);
  }
  const slots = snapshot.config.trials_per_height;
  return [...byHeight.keys()].sort((a, b) => a - b).map((height) => {
    const trials = byHeight.get(height)!;
    const cells: LadderCell[] = [];
    for (let i = 0; i < slots; i++) {
      const trial = trials[i];
      if (!trial) {
        cells.push({ state: "pending", text: "", trialIndex: null, disagreement: false });
      } else if (trial.outcome === "broke") {
        cells.push({
          state: "broke",
          text: "N/A",
          trialIndex: trial.trial_index,
          disagreement: trial.disagreement,
        });
      } else {
        cells.push({
          state: "intact",
          text: gformat(trial.peak_force_n as number),
          trialIndex: trial.trial_index,
          disagreement: trial.disagreement,
        });
      }
    }
    const peaks = trials
      .filter((t) => t.outcome === "intact" && t.peak_force_n !== null)
      .map((t) => t.peak_force_n as number);
    const averageText = peaks.length
      ? gformat(peaks.reduce((a, b) => a + b, 0) / peaks.length)
      : "N/A";
    return { heightCm: height, cells, averageText };
  });
}

/** The rows rendered as CSV, for comparison against the server export. */
export function ladderRowsAsCsv(snapshot: CampaignSnapshot): string {
  const slots = snapshot.config.trials_per_height;
  const header = ["height_cm", ...Array.from({ length: slots }, (_, i) => `t${i + 1}_n`), "average_n"];
  const lines = [header.join(",")];
  for (const row of ladderRows(snapshot)) {
    lines.push([gformat(row.heightCm), ...row.cells.map((c) => c.text), row.averageText].join(","));
  }
  return lines.join("\n") + "\n";
}

export function renderLadder(snapshot: CampaignSnapshot): string {
  const slots = snapshot.config.trials_per_height;
  const head =
    "<tr><th>height (cm)</th>" +
    Array.from({ length: slots }, (_, i) => `<th>t${i + 1} (N)</th>`).join("") +
    "<th>average (N)</th></tr>";
  const body = ladderRows(snapshot)
    .map((row) => {
      const cells = row.cells
        .map((cell) => {
          const flag = cell.disagreement ? ` <span class="flag" title="classifier disagrees">&#9888;</span>` : "";
          return `<td class="cell ${cell.state}">${cell.text}${flag}</td>`;
        })
        .join("");
      return `<tr><th>${gformat(row.heightCm)}</th>${cells}<td class="avg">${row.averageText}</td></tr>`;
    })
    .join("");
  return `<table class="ladder">${head}${body}</table>`;
}

export function renderResultCard(snapshot: CampaignSnapshot): string {
  if (snapshot.result === null) {
    return `<div class="result-card pending">campaign ${snapshot.phase}; no result yet</div>`;
  }
  const { breaking_height_cm, breaking_force_n } = snapshot.result;
  return (
    `<div class="result-card complete">breaking height <strong>${gformat(breaking_height_cm)} cm</strong>, ` +
    `breaking force <strong>${gformat(breaking_force_n)} N</strong></div>`
  );
}

export function renderPendingAction(next: NextAction): string {
  if (next.action === "finished") {
    return `<div class="pending-action finished">finished &mdash; no further drops</div>`;
  }
  return `<div class="pending-action drop">next: drop at <strong>${gformat(next.height_cm as number)} cm</strong></div>`;
}

/**
 * Idempotency key for the pending trial slot. Derived from the snapshot so
 * a double-submitted form posts the same key and the server records one
 * trial.
 */
export function pendingTrialKey(snapshot: CampaignSnapshot, heightCm: number): string {
  const at = snapshot.trials.filter((t) => t.height_cm === heightCm).length;
  return `ui:${snapshot.campaign_id}:${Math.round(heightCm * 10)}:${at}`;
}

export interface OutcomeEntry {
  outcome: "intact" | "broke";
  peakForceN: number | null;
  hasTrace: boolean;
}

/** Inline validation mirroring the server's rules. The operator reads the
 * peak off the amplifier display; traces are supplementary and analyzed
 * asynchronously, so an intact trial always needs the manual value. */
export function validateOutcomeEntry(entry: OutcomeEntry): string | null {
  if (entry.outcome === "intact" && entry.peakForceN === null) {
    return "an intact trial needs its peak force: enter the amplifier reading";
  }
  if (entry.outcome === "intact" && entry.peakForceN !== null && entry.peakForceN <= 0) {
    return "peak force must be positive";
  }
  if (entry.outcome === "broke" && entry.peakForceN !== null) {
    return "broken trials record no peak force (the first peak is not the impact force)";
  }
  return null;
}
