// JSON payload shapes of the dropbench HTTP API.

export interface KinSummary {
  p_rest_mm: number;
  p_lowest_mm: number;
  d_stop_mm: number;
  v_max_mm_s: number;
}

export interface TrialAnalysis {
  peak_force_n: number;
  f_theoretical_n: number;
  error_pct: number;
  signature: "intact" | "broke" | "uncertain";
  kin_summary: KinSummary;
}

export interface Trial {
  trial_index: number;
  height_cm: number;
  outcome: "intact" | "broke";
  peak_force_n: number | null;
  idempotency_key: string;
  trace_id: string | null;
  analysis: TrialAnalysis | null;
  disagreement: boolean;
  analysis_status: "none" | "pending" | "done" | "failed";
}

export interface CampaignSnapshot {
  schema_version: number;
  campaign_id: string;
  part: {
    slot_depth_mm: number;
    wall_loops: number;
    print_orientation: string;
    infill: string;
  };
  config: {
    start_height_cm: number;
    mass_kg: number;
    coarse_step_cm: number;
    fine_step_cm: number;
    trials_per_height: number;
    max_height_cm: number;
  };
  phase: "coarse" | "refine" | "complete";
  trials: Trial[];
  result: { breaking_height_cm: number; breaking_force_n: number } | null;
  analysis_errors: Record<string, string>;
}

export interface NextAction {
  action: "drop" | "finished";
  height_cm: number | null;
}

export interface Recommendation {
  slot_depth_mm: number;
  wall_loops: number;
  mean_breaking_force_n: number;
  margin_n: number;
  note: string | null;
}

export interface ProblemDocument {
  type: string;
  title: string;
  status: number;
  detail: string;
}

/** Format a number the way the server's CSV export does (printf %g). */
export function gformat(value: number): string {
  if (!isFinite(value)) return String(value);
  return String(Number(value.toPrecision(6)));
}
