// Dashboard wiring. The server is the sole source of truth: after every
// mutation the UI re-fetches the snapshot and the pending action. Stale
// submissions surface the server's 409 in a banner instead of being
// resolved client-side.

import { ApiError, DropbenchClient } from "./api.js";
import {
  ladderRows,
  pendingTrialKey,
  renderLadder,
  renderPendingAction,
  renderResultCard,
  validateOutcomeEntry,
} from "./ladder.js";
import type { CampaignSnapshot, NextAction } from "./model.js";
import { renderAdvisorError, renderRecommendation } from "./advisorpanel.js";
import { parseForceCsv, renderTraceChart } from "./tracechart.js";

const client = new DropbenchClient("");

let campaignId: string | null = null;
let snapshot: CampaignSnapshot | null = null;
let next: NextAction | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function banner(text: string, kind: "info" | "error" = "info") {
  const box = el<HTMLDivElement>("banner");
  box.className = `banner ${kind}`;
  box.textContent = text;
  box.hidden = false;
}

function clearBanner() {
  el<HTMLDivElement>("banner").hidden = true;
}

async function refresh() {
  if (!campaignId) return;
  snapshot = await client.getCampaign(campaignId);
  next = await client.getNext(campaignId);
  el("ladder").innerHTML = renderLadder(snapshot);
  el("result").innerHTML = renderResultCard(snapshot);
  el("pending").innerHTML = renderPendingAction(next);
  const entry = el<HTMLFieldSetElement>("entry-fields");
  entry.disabled = next.action === "finished";
  if (next.action === "drop") {
    el<HTMLSpanElement>("entry-height").textContent = `${next.height_cm} cm`;
  }
  renderTrialList();
}

function renderTrialList() {
  if (!snapshot) return;
  const options = snapshot.trials
    .filter((t) => t.trace_id !== null)
    .map((t) => `<option value="${t.trial_index}">#${t.trial_index} @ ${t.height_cm} cm (${t.outcome})</option>`)
    .join("");
  el<HTMLSelectElement>("trace-select").innerHTML = options;
}

async function onCreateCampaign() {
  clearBanner();
  try {
    const created = await client.createCampaign({
      part: {
        slot_depth_mm: Number(el<HTMLInputElement>("part-slot").value),
        wall_loops: Number(el<HTMLInputElement>("part-walls").value),
      },
      config: {
        start_height_cm: Number(el<HTMLInputElement>("cfg-start").value),
        mass_kg: Number(el<HTMLInputElement>("cfg-mass").value),
      },
    });
    campaignId = created.campaign_id;
    el<HTMLInputElement>("campaign-id").value = campaignId;
    await refresh();
  } catch (error) {
    banner(String(error), "error");
  }
}

async function onLoadCampaign() {
  clearBanner();
  campaignId = el<HTMLInputElement>("campaign-id").value.trim();
  try {
    await refresh();
  } catch (error) {
    banner(String(error), "error");
  }
}

async function readFile(input: HTMLInputElement): Promise<string | null> {
  const file = input.files?.[0];
  if (!file) return null;
  return file.text();
}

async function onSubmitOutcome() {
  if (!campaignId || !snapshot || !next || next.action !== "drop") return;
  clearBanner();
  const outcome = el<HTMLInputElement>("outcome-broke").checked ? "broke" : "intact";
  const peakRaw = el<HTMLInputElement>("entry-peak").value.trim();
  const peak = peakRaw === "" ? null : Number(peakRaw);
  const forceCsv = await readFile(el<HTMLInputElement>("entry-force"));
  const kinCsv = await readFile(el<HTMLInputElement>("entry-kin"));

  const validation = validateOutcomeEntry({
    outcome,
    peakForceN: peak,
    hasTrace: forceCsv !== null && kinCsv !== null,
  });
  if (validation) {
    banner(validation, "error");
    return;
  }

  try {
    let traceId: string | null = null;
    if (forceCsv && kinCsv) {
      traceId = (await client.uploadTraces(forceCsv, kinCsv)).trace_id;
    }
    const height = next.height_cm as number;
    await client.postTrial(campaignId, {
      height_cm: height,
      outcome,
      peak_force_n: peak,
      trace_id: traceId,
      idempotency_key: pendingTrialKey(snapshot, height),
    });
    el<HTMLInputElement>("entry-peak").value = "";
    el<HTMLInputElement>("entry-force").value = "";
    el<HTMLInputElement>("entry-kin").value = "";
    await refresh();
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      banner(`out of step with the bench: ${error.problem.detail}`, "error");
      await refresh(); // advance to the server's current pending action
    } else {
      banner(String(error), "error");
    }
  }
}

async function onShowTrace() {
  if (!campaignId || !snapshot) return;
  const index = Number(el<HTMLSelectElement>("trace-select").value);
  const trial = snapshot.trials.find((t) => t.trial_index === index);
  if (!trial || !trial.trace_id) return;
  const pair = (await fetch(`/traces/${trial.trace_id}`).then((r) => r.json())) as {
    force_csv: string;
  };
  el("trace-chart").innerHTML = renderTraceChart(parseForceCsv(pair.force_csv), trial.analysis, {
    operatorOutcome: trial.outcome,
  });
}

async function onAdvise() {
  const target = Number(el<HTMLInputElement>("advise-target").value);
  try {
    const rec = await client.advise(target);
    el("advise-result").innerHTML = renderRecommendation(rec);
  } catch (error) {
    el("advise-result").innerHTML = renderAdvisorError(error);
  }
}

export function install() {
  el<HTMLButtonElement>("btn-create").onclick = onCreateCampaign;
  el<HTMLButtonElement>("btn-load").onclick = onLoadCampaign;
  el<HTMLButtonElement>("btn-submit").onclick = onSubmitOutcome;
  el<HTMLButtonElement>("btn-trace").onclick = onShowTrace;
  el<HTMLButtonElement>("btn-advise").onclick = onAdvise;
}

if (typeof document !== "undefined" && document.getElementById("btn-create")) {
  install();
}

export { ladderRows, renderLadder, renderResultCard };
