// Thin typed client over the dropbench HTTP API. All campaign logic lives
// on the server; this module only moves JSON.

import type {
  CampaignSnapshot,
  NextAction,
  ProblemDocument,
  Recommendation,
  Trial,
} from "./model.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public problem: ProblemDocument,
  ) {
    super(problem.detail || problem.title);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(`${base}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
  } catch {
    // Network-level failure (e.g. a keep-alive socket the server already
    // closed): retry once. Mutations carry idempotency keys, so a replay
    // of a request that did arrive is harmless.
    response = await fetch(`${base}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
  }
  if (!response.ok) {
    const problem = (await response.json().catch(() => ({
      type: "about:blank",
      title: response.statusText,
      status: response.status,
      detail: response.statusText,
    }))) as ProblemDocument;
    throw new ApiError(response.status, problem);
  }
  return response.json() as Promise<T>;
}

export interface TrialSubmission {
  height_cm: number;
  outcome: "intact" | "broke";
  peak_force_n?: number | null;
  idempotency_key?: string;
  trace_id?: string | null;
}

export class DropbenchClient {
  constructor(public base: string = "") {}

  createCampaign(body: {
    part: { slot_depth_mm: number; wall_loops: number };
    config: { start_height_cm: number; mass_kg: number };
    campaign_id?: string;
  }): Promise<CampaignSnapshot> {
    return request(this.base, "/campaigns", { method: "POST", body: JSON.stringify(body) });
  }

  getCampaign(id: string): Promise<CampaignSnapshot> {
    return request(this.base, `/campaigns/${id}`);
  }

  getNext(id: string): Promise<NextAction> {
    return request(this.base, `/campaigns/${id}/next`);
  }

  postTrial(id: string, body: TrialSubmission): Promise<{ created: boolean; trial: Trial }> {
    return request(this.base, `/campaigns/${id}/trials`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getReport(id: string): Promise<Record<string, unknown>> {
    return request(this.base, `/campaigns/${id}/report`);
  }

  uploadTraces(forceCsv: string, kinCsv: string): Promise<{ trace_id: string }> {
    return request(this.base, "/traces", {
      method: "POST",
      body: JSON.stringify({ force_csv: forceCsv, kin_csv: kinCsv }),
    });
  }

  advise(targetFMaxN: number): Promise<Recommendation> {
    return request(this.base, "/advise", {
      method: "POST",
      body: JSON.stringify({ target_f_max_n: targetFMaxN }),
    });
  }
}
