"""Command-line interface.

Subcommands:

    validate-rig   analyze one drop and check theory against measurement
    simulate       synthesize a drop's trace files with known truth
    campaign       new / next / record / report over a file store
    advise         recommend a print configuration for a target force
    serve          run the HTTP service

Report paths write figures (PNG) next to the delimited output. Exit codes:
0 success, 1 validation bound exceeded, 2 errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import advisor
from .. import campaign as cp
from ..errors import DropBenchError
from ..simrig import SimConfig, simulate_drop, write_drop_files
from ..trace import analyze_trial, ingest_force_trace, ingest_kin_trace, kinematic_summary
from .api import create_app
from .config import RigSettings, load_rig_settings
from .store import CampaignStore, canonical_json


def _rig_settings(args) -> RigSettings:
    if getattr(args, "config", None):
        return load_rig_settings(args.config)
    return RigSettings()


# ---------------------------------------------------------------------------
# validate-rig
# ---------------------------------------------------------------------------

def cmd_validate_rig(args) -> int:
    rig = _rig_settings(args)
    bound = args.bound if args.bound is not None else rig.error_bound_pct
    force = ingest_force_trace(Path(args.force))
    kin = ingest_kin_trace(Path(args.kin))
    analysis = analyze_trial(
        force, kin, args.mass, cal=rig.calibration(), rest_window_s=rig.rest_window_s
    )
    ks = analysis.kin
    ok = abs(analysis.error_pct) <= bound
    rows = [
        ("mass_kg", f"{args.mass:g}"),
        ("p_rest_mm", f"{ks.p_rest_mm:.3f}"),
        ("p_lowest_mm", f"{ks.p_lowest_mm:.3f}"),
        ("d_stop_mm", f"{ks.d_stop_mm:.3f}"),
        ("v_max_mm_s", f"{ks.v_max_mm_s:.3f}"),
        ("f_theoretical_n", f"{analysis.f_theoretical_n:.1f}"),
        ("f_actual_n", f"{analysis.peak_force_n:.1f}"),
        ("error_pct", f"{analysis.error_pct:.1f}"),
        ("signature", analysis.signature.value),
        ("verdict", f"{'PASS' if ok else 'FAIL'} (|error| <= {bound:g}%)"),
    ]
    width = max(len(k) for k, _ in rows) + 2
    for key, value in rows:
        print(f"{key:<{width}}{value}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(
            "variable,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"
        )
        (out / "analysis.json").write_text(canonical_json(analysis.to_dict()))
        from ..plots import plot_force_trace, plot_kin_trace

        plot_force_trace(force, out / "force_trace.png", cal=rig.calibration(), analysis=analysis)
        plot_kin_trace(kin, out / "kin_trace.png", summary=ks)
        print(f"report written to {out}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = SimConfig(
        mass_kg=args.mass,
        drop_height_cm=args.height,
        rail_efficiency=args.eta,
        contact_stiffness_n_m=args.stiffness,
        contact_damping_ns_m=args.damping,
        part_break_threshold_n=args.break_at,
        noise_sigma_v=args.noise,
        force_rate_hz=args.force_rate,
        kin_rate_hz=args.kin_rate,
        seed=args.seed,
    )
    force, kin, truth = simulate_drop(cfg)
    paths = write_drop_files(force, kin, truth, args.out)
    print(f"wrote {paths['force']}, {paths['kin']}, {paths['truth']}")
    print(
        f"truth: v_impact {truth.v_impact_m_s:.4f} m/s, peak {truth.peak_force_n:.2f} N, "
        f"broke {truth.broke}"
    )
    return 0


# ---------------------------------------------------------------------------
# campaign
# ---------------------------------------------------------------------------

def cmd_campaign_new(args) -> int:
    store = CampaignStore(args.store)
    part = cp.PartSpec(
        slot_depth_mm=args.slot_depth,
        wall_loops=args.wall_loops,
        print_orientation=cp.PrintOrientation(args.orientation),
        infill=args.infill,
    )
    config = cp.CampaignConfig(
        start_height_cm=args.start,
        mass_kg=args.mass,
        coarse_step_cm=args.coarse,
        fine_step_cm=args.fine,
        trials_per_height=args.trials,
        max_height_cm=args.max_height,
    )
    doc = store.create_campaign(part, config, campaign_id=args.id)
    action = cp.next_action(doc.state)
    print(f"campaign {doc.campaign_id} created; first drop at {action.height_cm:g} cm")
    return 0


def cmd_campaign_next(args) -> int:
    store = CampaignStore(args.store)
    doc = store.load(args.id)
    action = cp.next_action(doc.state)
    if isinstance(action, cp.Finished):
        result = doc.state.result
        print(
            f"finished: breaking height {result.breaking_height_cm:g} cm, "
            f"breaking force {result.breaking_force_n:g} N"
        )
    else:
        print(f"drop at {action.height_cm:g} cm")
    return 0


def cmd_campaign_record(args) -> int:
    store = CampaignStore(args.store)
    rig = _rig_settings(args)
    trace_id = None
    if args.force or args.kin:
        if not (args.force and args.kin):
            print("error: provide both --force and --kin or neither", file=sys.stderr)
            return 2
        force_csv = Path(args.force).read_text()
        kin_csv = Path(args.kin).read_text()
        ingest_force_trace(force_csv)
        ingest_kin_trace(kin_csv)
        trace_id = store.put_trace_pair(force_csv, kin_csv)
    doc, trial, created = store.record_trial(
        args.id,
        args.height,
        cp.Outcome(args.outcome),
        peak_force_n=args.peak,
        idempotency_key=args.key,
        trace_id=trace_id,
    )
    if not created:
        print(f"trial {trial.trial_index} already recorded (idempotency key match)")
        return 0
    if trace_id is not None:
        analysis = analyze_trial(
            ingest_force_trace(Path(args.force)),
            ingest_kin_trace(Path(args.kin)),
            doc.state.config.mass_kg,
            cal=rig.calibration(),
            rest_window_s=rig.rest_window_s,
        )
        doc = store.attach_analysis(args.id, trial.trial_index, analysis)
        trial = doc.state.trials[trial.trial_index]
        if trial.disagreement:
            print(
                f"note: classifier read this trace as {analysis.signature.value!r}, "
                f"operator recorded {args.outcome!r}"
            )
    action = cp.next_action(doc.state)
    if isinstance(action, cp.Finished):
        result = doc.state.result
        print(
            f"recorded trial {trial.trial_index}; campaign complete: "
            f"{result.breaking_height_cm:g} cm / {result.breaking_force_n:g} N"
        )
    else:
        print(f"recorded trial {trial.trial_index}; next drop at {action.height_cm:g} cm")
    return 0


def cmd_campaign_report(args) -> int:
    store = CampaignStore(args.store)
    doc = store.load(args.id)
    report = cp.campaign_report(doc.state)
    report["campaign_id"] = doc.campaign_id
    print(json.dumps(report, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(canonical_json(report))
        (out / "ladder.csv").write_text(cp.ladder_csv(doc.state))
        from ..plots import plot_campaign_ladder

        plot_campaign_ladder(doc.state, out / "ladder.png")
        print(f"report written to {out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# advise
# ---------------------------------------------------------------------------

def cmd_advise(args) -> int:
    table = advisor.load_table_csv(Path(args.table)) if args.table else advisor.builtin_table()
    rec = advisor.recommend(args.target, table)
    print(
        f"use slot depth {rec.entry.slot_depth_mm:g} mm with {rec.entry.wall_loops} wall loops "
        f"(mean breaking force {rec.entry.mean_breaking_force_n:g} N, margin {rec.margin_n:g} N)"
    )
    if rec.note:
        print(rec.note)
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    store = CampaignStore(args.store)
    app = create_app(store, rig=_rig_settings(args))
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dropbench", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-rig", help="theoretical-vs-actual impact force check")
    p.add_argument("--force", required=True, help="force trace CSV (t_s,voltage_v)")
    p.add_argument("--kin", required=True, help="kinematic trace CSV (t_s,z_mm)")
    p.add_argument("--mass", type=float, required=True, help="basket + attachment mass, kg")
    p.add_argument("--bound", type=float, default=None, help="max |error| percent (default 25)")
    p.add_argument("--config", help="rig settings file (key = value)")
    p.add_argument("--out", help="directory for report.csv, analysis.json, and figures")
    p.set_defaults(func=cmd_validate_rig)

    p = sub.add_parser("simulate", help="synthesize one drop with known truth")
    p.add_argument("--height", type=float, required=True, help="drop height, cm")
    p.add_argument("--mass", type=float, required=True, help="mass, kg")
    p.add_argument("--break-at", type=float, default=None, help="part strength, N")
    p.add_argument("--eta", type=float, default=0.85, help="rail efficiency (0-1]")
    p.add_argument("--stiffness", type=float, default=25000.0, help="contact stiffness, N/m")
    p.add_argument("--damping", type=float, default=8.0, help="contact damping, N*s/m")
    p.add_argument("--noise", type=float, default=0.005, help="voltage noise sigma, V")
    p.add_argument("--force-rate", type=float, default=2000.0, help="force channel rate, Hz")
    p.add_argument("--kin-rate", type=float, default=200.0, help="kinematic channel rate, Hz")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    pc = sub.add_parser("campaign", help="run a breaking-height campaign")
    csub = pc.add_subparsers(dest="campaign_command", required=True)

    p = csub.add_parser("new", help="create a campaign")
    p.add_argument("--store", required=True, help="store directory")
    p.add_argument("--id", default=None, help="campaign id (generated when omitted)")
    p.add_argument("--slot-depth", type=float, required=True, help="slot depth, mm")
    p.add_argument("--wall-loops", type=int, required=True)
    p.add_argument(
        "--orientation",
        default=cp.PrintOrientation.LAYERS_PARALLEL_TO_BREAK_LINE.value,
        choices=[o.value for o in cp.PrintOrientation],
    )
    p.add_argument("--infill", default="15% grid")
    p.add_argument("--start", type=float, required=True, help="start height, cm")
    p.add_argument("--mass", type=float, required=True, help="mass, kg")
    p.add_argument("--coarse", type=float, default=1.0, help="coarse step, cm")
    p.add_argument("--fine", type=float, default=0.2, help="fine step, cm")
    p.add_argument("--trials", type=int, default=3, help="trials per refined height")
    p.add_argument("--max-height", type=float, default=60.0, help="rig maximum, cm")
    p.set_defaults(func=cmd_campaign_new)

    p = csub.add_parser("next", help="show the pending action")
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.set_defaults(func=cmd_campaign_next)

    p = csub.add_parser("record", help="record a trial outcome")
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--height", type=float, required=True, help="height, cm")
    p.add_argument("--outcome", required=True, choices=["intact", "broke"])
    p.add_argument("--peak", type=float, default=None, help="peak force, N (intact trials)")
    p.add_argument("--force", default=None, help="force trace CSV to attach")
    p.add_argument("--kin", default=None, help="kinematic trace CSV to attach")
    p.add_argument("--key", default=None, help="idempotency key")
    p.add_argument("--config", help="rig settings file")
    p.set_defaults(func=cmd_campaign_record)

    p = csub.add_parser("report", help="print the campaign report")
    p.add_argument("--store", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--out", help="directory for report.json, ladder.csv, ladder.png")
    p.set_defaults(func=cmd_campaign_report)

    p = sub.add_parser("advise", help="recommend a print configuration")
    p.add_argument("--target", type=float, required=True, help="max permissible force, N")
    p.add_argument("--table", default=None, help="strength table CSV (default: built-in)")
    p.set_defaults(func=cmd_advise)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--config", help="rig settings file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DropBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
