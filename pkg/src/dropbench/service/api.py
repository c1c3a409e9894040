"""HTTP JSON API over the campaign store.

Thin, loss-free wrappers over the campaign/advisor operations: every
mutation is equivalent to the corresponding in-process call. Errors are
RFC-7807-style problem documents; payload field names carry explicit units.
Trace analysis triggered by a trial upload runs asynchronously on a worker
pool and lands in the same per-campaign write path.
"""

from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .. import advisor
from .. import campaign as cp
from ..errors import (
    CampaignRangeError,
    DropBenchError,
    InfeasibleTargetError,
    ProtocolViolationError,
)
from ..trace import analyze_trial, ingest_force_trace, ingest_kin_trace
from .config import RigSettings
from .store import CampaignStore, UnknownCampaignError, UnknownTraceError

PROBLEM_MEDIA_TYPE = "application/problem+json"


def problem(status: int, title: str, detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"type": "about:blank", "title": title, "status": status, "detail": detail},
        media_type=PROBLEM_MEDIA_TYPE,
    )


class PartBody(BaseModel):
    slot_depth_mm: float
    wall_loops: int
    print_orientation: str = Field(
        default=cp.PrintOrientation.LAYERS_PARALLEL_TO_BREAK_LINE.value,
        pattern="^(layers_parallel_to_break_line|layers_perpendicular)$",
    )
    infill: str = "15% grid"


class ConfigBody(BaseModel):
    start_height_cm: float
    mass_kg: float
    coarse_step_cm: float = 1.0
    fine_step_cm: float = 0.2
    trials_per_height: int = 3
    max_height_cm: float = 60.0


class CampaignBody(BaseModel):
    part: PartBody
    config: ConfigBody
    campaign_id: str | None = None


class TrialBody(BaseModel):
    height_cm: float
    outcome: str = Field(pattern="^(intact|broke)$")
    peak_force_n: float | None = None
    idempotency_key: str | None = None
    trace_id: str | None = None


class TracePairBody(BaseModel):
    force_csv: str
    kin_csv: str


class AdviseBody(BaseModel):
    target_f_max_n: float


def create_app(
    store: CampaignStore,
    rig: RigSettings = RigSettings(),
    analysis_mode: str = "async",
) -> FastAPI:
    """Build the service app.

    analysis_mode: "async" runs trace analysis on a worker pool (the
    operator's record step never waits on signal processing); "inline"
    runs it in-request, for deterministic tests and the CLI path.
    """
    if analysis_mode not in ("async", "inline"):
        raise ValueError(f"unknown analysis mode {analysis_mode!r}")
    app = FastAPI(title="dropbench service", version="0.1.0")
    app.state.store = store
    app.state.rig = rig
    app.state.executor = ThreadPoolExecutor(max_workers=2) if analysis_mode == "async" else None
    app.state.analysis_futures = []

    def run_analysis(campaign_id: str, trial_index: int, trace_id: str, mass_kg: float):
        try:
            force_csv, kin_csv = store.get_trace_pair(trace_id)
            analysis = analyze_trial(
                ingest_force_trace(force_csv),
                ingest_kin_trace(kin_csv),
                mass_kg,
                cal=rig.calibration(),
                rest_window_s=rig.rest_window_s,
            )
            store.attach_analysis(campaign_id, trial_index, analysis)
        except DropBenchError as exc:
            store.record_analysis_failure(campaign_id, trial_index, str(exc))

    def schedule_analysis(campaign_id: str, trial_index: int, trace_id: str, mass_kg: float):
        if app.state.executor is None:
            run_analysis(campaign_id, trial_index, trace_id, mass_kg)
        else:
            future: Future = app.state.executor.submit(
                run_analysis, campaign_id, trial_index, trace_id, mass_kg
            )
            app.state.analysis_futures.append(future)

    # -- error mapping -------------------------------------------------------

    @app.exception_handler(UnknownCampaignError)
    @app.exception_handler(UnknownTraceError)
    async def _not_found(request: Request, exc: DropBenchError):
        return problem(404, "not found", str(exc))

    @app.exception_handler(ProtocolViolationError)
    @app.exception_handler(CampaignRangeError)
    async def _conflict(request: Request, exc: DropBenchError):
        return problem(409, "protocol violation", str(exc))

    @app.exception_handler(InfeasibleTargetError)
    async def _infeasible(request: Request, exc: DropBenchError):
        return problem(422, "infeasible target", str(exc))

    @app.exception_handler(DropBenchError)
    async def _unprocessable(request: Request, exc: DropBenchError):
        return problem(422, "invalid request", str(exc))

    # -- campaigns -------------------------------------------------------------

    @app.post("/campaigns", status_code=201)
    def create_campaign(body: CampaignBody):
        part = cp.PartSpec(
            slot_depth_mm=body.part.slot_depth_mm,
            wall_loops=body.part.wall_loops,
            print_orientation=cp.PrintOrientation(body.part.print_orientation),
            infill=body.part.infill,
        )
        config = cp.CampaignConfig(**body.config.model_dump())
        doc = store.create_campaign(part, config, campaign_id=body.campaign_id)
        return doc.snapshot()

    @app.get("/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        return store.load(campaign_id).snapshot()

    @app.get("/campaigns/{campaign_id}/next")
    def get_next(campaign_id: str):
        doc = store.load(campaign_id)
        action = cp.next_action(doc.state)
        if isinstance(action, cp.Finished):
            return {"action": "finished", "height_cm": None}
        return {"action": "drop", "height_cm": action.height_cm}

    @app.post("/campaigns/{campaign_id}/trials")
    def post_trial(campaign_id: str, body: TrialBody, response: Response):
        doc, trial, created = store.record_trial(
            campaign_id,
            body.height_cm,
            cp.Outcome(body.outcome),
            peak_force_n=body.peak_force_n,
            idempotency_key=body.idempotency_key,
            trace_id=body.trace_id,
        )
        if created and trial.trace_id is not None:
            schedule_analysis(
                campaign_id, trial.trial_index, trial.trace_id, doc.state.config.mass_kg
            )
        response.status_code = 201 if created else 200
        return {"created": created, "trial": trial.to_dict()}

    @app.get("/campaigns/{campaign_id}/report")
    def get_report(campaign_id: str):
        doc = store.load(campaign_id)
        report = cp.campaign_report(doc.state)
        report["campaign_id"] = doc.campaign_id
        report["analysis_errors"] = {str(k): v for k, v in sorted(doc.analysis_errors.items())}
        return report

    # -- traces ----------------------------------------------------------------

    @app.post("/traces", status_code=201)
    def post_traces(body: TracePairBody):
        # Parse both channels up front so bad uploads fail here, not at
        # analysis time.
        ingest_force_trace(body.force_csv)
        ingest_kin_trace(body.kin_csv)
        trace_id = store.put_trace_pair(body.force_csv, body.kin_csv)
        return {"trace_id": trace_id}

    @app.get("/traces/{trace_id}")
    def get_traces(trace_id: str):
        force_csv, kin_csv = store.get_trace_pair(trace_id)
        return {"trace_id": trace_id, "force_csv": force_csv, "kin_csv": kin_csv}

    # -- advisor -----------------------------------------------------------------

    @app.post("/advise")
    def advise(body: AdviseBody):
        rec = advisor.recommend(body.target_f_max_n, advisor.builtin_table())
        return rec.to_dict()

    return app


def drain_analyses(app: FastAPI):
    """Wait for every scheduled background analysis to finish (test helper)."""
    for future in app.state.analysis_futures:
        future.result()
    app.state.analysis_futures.clear()
