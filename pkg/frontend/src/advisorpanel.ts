// Advisor panel: wraps POST /advise and displays the recommendation
// verbatim (entry, margin, note). Infeasible targets surface the server's
// explanation of the functional floor.

import { ApiError } from "./api.js";
import type { Recommendation } from "./model.js";
import { gformat } from "./model.js";

export function renderRecommendation(rec: Recommendation): string {
  const note = rec.note ? `<p class="note">${rec.note}</p>` : "";
  return (
    `<div class="recommendation">` +
    `<p>slot depth <strong>${gformat(rec.slot_depth_mm)} mm</strong>, ` +
    `<strong>${rec.wall_loops}</strong> wall loops ` +
    `(mean breaking force ${gformat(rec.mean_breaking_force_n)} N, ` +
    `margin ${gformat(rec.margin_n)} N)</p>` +
    note +
    `</div>`
  );
}

export function renderAdvisorError(error: unknown): string {
  if (error instanceof ApiError && error.status === 422) {
    return `<div class="recommendation infeasible">${error.problem.detail}</div>`;
  }
  return `<div class="recommendation error">advisor request failed: ${String(error)}</div>`;
}
