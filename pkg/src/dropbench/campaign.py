"""Adaptive breaking-height search as an explicit, persistable state machine.

The search runs in two phases. Coarse: single drops ascending in 1.0 cm
steps until the part first breaks. Refine: starting one fine step (0.2 cm)
below the first break, a fixed number of trials per height descending until
a height survives every trial. The breaking height is the highest refined
height with at least one surviving trial; the breaking force is the mean
peak force of the surviving trials at that height (a conservative estimate,
since broken trials never yield a usable peak).

Heights are carried as integer tenths of a centimetre internally so that
repeated 0.2 cm steps cannot accumulate float drift. The trial list is an
append-only event log: replaying it through record_trial reconstructs the
state exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import (
    CampaignRangeError,
    InvalidInputError,
    MissingMeasurementError,
    NotReadyError,
    ProtocolViolationError,
    StateCorruptionError,
)
from .trace import Signature, TrialAnalysis

SCHEMA_VERSION = 1


class Outcome(Enum):
    INTACT = "intact"
    BROKE = "broke"


class Phase(Enum):
    COARSE = "coarse"
    REFINE = "refine"
    COMPLETE = "complete"


class PrintOrientation(Enum):
    LAYERS_PARALLEL_TO_BREAK_LINE = "layers_parallel_to_break_line"
    LAYERS_PERPENDICULAR = "layers_perpendicular"


def to_tenths(height_cm: float, what: str = "height") -> int:
    """Convert cm to integer tenths, rejecting values off the 0.1 cm grid."""
    n = round(height_cm * 10.0)
    if abs(height_cm * 10.0 - n) > 1e-6:
        raise InvalidInputError(f"{what} {height_cm} cm is not a multiple of 0.1 cm")
    return int(n)


def from_tenths(tenths: int) -> float:
    return tenths / 10.0


@dataclass(frozen=True)
class PartSpec:
    """A printed attachment variant under test."""

    slot_depth_mm: float
    wall_loops: int
    print_orientation: PrintOrientation = PrintOrientation.LAYERS_PARALLEL_TO_BREAK_LINE
    infill: str = "15% grid"

    def __post_init__(self):
        if not (self.slot_depth_mm > 0):
            raise InvalidInputError(f"slot depth must be positive, got {self.slot_depth_mm}")
        if self.wall_loops < 1:
            raise InvalidInputError(f"wall loops must be >= 1, got {self.wall_loops}")

    def to_dict(self) -> dict:
        return {
            "slot_depth_mm": self.slot_depth_mm,
            "wall_loops": self.wall_loops,
            "print_orientation": self.print_orientation.value,
            "infill": self.infill,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PartSpec":
        return cls(
            slot_depth_mm=d["slot_depth_mm"],
            wall_loops=d["wall_loops"],
            print_orientation=PrintOrientation(
                d.get("print_orientation", PrintOrientation.LAYERS_PARALLEL_TO_BREAK_LINE.value)
            ),
            infill=d.get("infill", "15% grid"),
        )


@dataclass(frozen=True)
class CampaignConfig:
    """Search parameters for one campaign."""

    start_height_cm: float
    mass_kg: float
    coarse_step_cm: float = 1.0
    fine_step_cm: float = 0.2
    trials_per_height: int = 3
    max_height_cm: float = 60.0

    def __post_init__(self):
        if not (self.mass_kg > 0):
            raise InvalidInputError(f"mass must be positive, got {self.mass_kg}")
        if self.trials_per_height < 1:
            raise InvalidInputError("trials_per_height must be >= 1")
        fine = to_tenths(self.fine_step_cm, "fine step")
        coarse = to_tenths(self.coarse_step_cm, "coarse step")
        start = to_tenths(self.start_height_cm, "start height")
        maxh = to_tenths(self.max_height_cm, "max height")
        if not (0 < fine < coarse):
            raise InvalidInputError("need 0 < fine_step < coarse_step")
        if coarse % fine != 0:
            raise InvalidInputError(
                "coarse step must be a multiple of the fine step so refined "
                "heights stay on the fine grid"
            )
        if start < fine:
            raise InvalidInputError("start height must be at least one fine step")
        if maxh < start:
            raise InvalidInputError("max height must be >= start height")

    @property
    def start_tenths(self) -> int:
        return to_tenths(self.start_height_cm)

    @property
    def coarse_tenths(self) -> int:
        return to_tenths(self.coarse_step_cm)

    @property
    def fine_tenths(self) -> int:
        return to_tenths(self.fine_step_cm)

    @property
    def max_tenths(self) -> int:
        return to_tenths(self.max_height_cm)

    def to_dict(self) -> dict:
        return {
            "start_height_cm": self.start_height_cm,
            "mass_kg": self.mass_kg,
            "coarse_step_cm": self.coarse_step_cm,
            "fine_step_cm": self.fine_step_cm,
            "trials_per_height": self.trials_per_height,
            "max_height_cm": self.max_height_cm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        return cls(
            start_height_cm=d["start_height_cm"],
            mass_kg=d["mass_kg"],
            coarse_step_cm=d.get("coarse_step_cm", 1.0),
            fine_step_cm=d.get("fine_step_cm", 0.2),
            trials_per_height=d.get("trials_per_height", 3),
            max_height_cm=d.get("max_height_cm", 60.0),
        )


@dataclass(frozen=True)
class TrialRecord:
    """One recorded drop. Operator outcome is ground truth; the trace
    classifier only annotates disagreements."""

    trial_index: int
    height_tenths: int
    outcome: Outcome
    peak_force_n: float | None
    idempotency_key: str
    trace_id: str | None = None
    analysis: TrialAnalysis | None = None

    @property
    def height_cm(self) -> float:
        return from_tenths(self.height_tenths)

    @property
    def disagreement(self) -> bool:
        """True when the classifier contradicts the operator outcome."""
        if self.analysis is None:
            return False
        sig = self.analysis.signature
        if sig is Signature.UNCERTAIN:
            return False
        return (sig is Signature.BROKE) != (self.outcome is Outcome.BROKE)

    def to_dict(self) -> dict:
        return {
            "trial_index": self.trial_index,
            "height_cm": self.height_cm,
            "outcome": self.outcome.value,
            "peak_force_n": self.peak_force_n,
            "idempotency_key": self.idempotency_key,
            "trace_id": self.trace_id,
            "analysis": None if self.analysis is None else self.analysis.to_dict(),
            "disagreement": self.disagreement,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(
            trial_index=d["trial_index"],
            height_tenths=to_tenths(d["height_cm"]),
            outcome=Outcome(d["outcome"]),
            peak_force_n=d["peak_force_n"],
            idempotency_key=d["idempotency_key"],
            trace_id=d.get("trace_id"),
            analysis=None if d.get("analysis") is None else TrialAnalysis.from_dict(d["analysis"]),
        )


@dataclass(frozen=True)
class CampaignResult:
    breaking_height_cm: float
    breaking_force_n: float

    def to_dict(self) -> dict:
        return {
            "breaking_height_cm": self.breaking_height_cm,
            "breaking_force_n": self.breaking_force_n,
        }


@dataclass(frozen=True)
class Drop:
    """Pending action: perform one drop at this height."""

    height_cm: float


class Finished:
    """Campaign complete; no further drops."""

    def __repr__(self):
        return "Finished()"

    def __eq__(self, other):
        return isinstance(other, Finished)

    def __hash__(self):
        return hash(Finished)


FINISHED = Finished()


@dataclass(frozen=True)
class CampaignState:
    """Immutable campaign value; mutate only through record_trial/attach_analysis."""

    part: PartSpec
    config: CampaignConfig
    trials: tuple[TrialRecord, ...] = ()
    phase: Phase = Phase.COARSE
    result: CampaignResult | None = None

    def ledger(self) -> dict[int, list[TrialRecord]]:
        """Trials grouped by height (tenths), insertion order preserved."""
        by_height: dict[int, list[TrialRecord]] = {}
        for tr in self.trials:
            by_height.setdefault(tr.height_tenths, []).append(tr)
        return by_height

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "part": self.part.to_dict(),
            "config": self.config.to_dict(),
            "phase": self.phase.value,
            "trials": [tr.to_dict() for tr in self.trials],
            "result": None if self.result is None else self.result.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignState":
        """Rebuild a state by replaying its trial list (ignores the stored
        phase/result fields beyond a consistency check)."""
        state = new_campaign(PartSpec.from_dict(d["part"]), CampaignConfig.from_dict(d["config"]))
        for td in d["trials"]:
            tr = TrialRecord.from_dict(td)
            state = record_trial(
                state,
                tr.height_cm,
                tr.outcome,
                peak_force_n=tr.peak_force_n,
                idempotency_key=tr.idempotency_key,
                trace_id=tr.trace_id,
            )
            if tr.analysis is not None:
                state = attach_analysis(state, tr.trial_index, tr.analysis)
        if state.phase.value != d["phase"]:
            raise StateCorruptionError(
                f"stored phase {d['phase']!r} does not match replayed {state.phase.value!r}"
            )
        return state


def new_campaign(part: PartSpec, config: CampaignConfig) -> CampaignState:
    return CampaignState(part=part, config=config)


# ---------------------------------------------------------------------------
# The state-machine scan
# ---------------------------------------------------------------------------

@dataclass
class _ScanResult:
    phase: Phase
    pending_tenths: int | None  # None when complete or out of range
    first_break_tenths: int | None
    out_of_range: str | None  # message when the next height leaves the rig range


def _scan(config: CampaignConfig, trials: tuple[TrialRecord, ...]) -> _ScanResult:
    """Fold the trial log into (phase, pending height).

    Raises StateCorruptionError when the log could not have been produced
    by this machine (wrong heights, trials after completion).
    """
    phase = Phase.COARSE
    pending: int | None = config.start_tenths
    first_break: int | None = None
    out_of_range: str | None = None
    rung_count = 0
    rung_intact = 0

    def step_down(rung: int) -> tuple[int | None, str | None]:
        nxt = rung - config.fine_tenths
        if nxt < config.fine_tenths:
            return None, (
                f"refinement would descend to {from_tenths(nxt)} cm, below the "
                f"minimum drop of {config.fine_step_cm} cm"
            )
        return nxt, None

    for tr in trials:
        if phase is Phase.COMPLETE:
            raise StateCorruptionError(
                f"trial {tr.trial_index} recorded after campaign completion"
            )
        if out_of_range is not None or pending is None:
            raise StateCorruptionError(
                f"trial {tr.trial_index} recorded although no height was pending"
            )
        if tr.height_tenths != pending:
            raise StateCorruptionError(
                f"trial {tr.trial_index} at {tr.height_cm} cm but pending height "
                f"was {from_tenths(pending)} cm"
            )
        if phase is Phase.COARSE:
            if tr.outcome is Outcome.BROKE:
                phase = Phase.REFINE
                first_break = tr.height_tenths
                pending, out_of_range = step_down(tr.height_tenths)
                rung_count = 0
                rung_intact = 0
            else:
                nxt = tr.height_tenths + config.coarse_tenths
                if nxt > config.max_tenths:
                    pending, out_of_range = None, (
                        f"coarse ascent would exceed the rig maximum of "
                        f"{config.max_height_cm} cm without a break"
                    )
                else:
                    pending = nxt
        else:  # REFINE
            rung_count += 1
            if tr.outcome is Outcome.INTACT:
                rung_intact += 1
            if rung_count == config.trials_per_height:
                if rung_intact == config.trials_per_height:
                    phase = Phase.COMPLETE
                    pending = None
                else:
                    pending, out_of_range = step_down(tr.height_tenths)
                    rung_count = 0
                    rung_intact = 0
    return _ScanResult(phase, pending, first_break, out_of_range)


def _refine_trials(state: CampaignState, first_break: int | None) -> list[TrialRecord]:
    """Trials recorded after the first coarse break (refinement phase only)."""
    if first_break is None:
        return []
    idx = next(
        i for i, tr in enumerate(state.trials)
        if tr.outcome is Outcome.BROKE and tr.height_tenths == first_break
    )
    return list(state.trials[idx + 1 :])


def _derive_result(state: CampaignState, scan: _ScanResult) -> CampaignResult:
    refine = _refine_trials(state, scan.first_break_tenths)
    by_height: dict[int, list[TrialRecord]] = {}
    for tr in refine:
        by_height.setdefault(tr.height_tenths, []).append(tr)
    with_intact = [
        h for h, trs in by_height.items() if any(t.outcome is Outcome.INTACT for t in trs)
    ]
    if not with_intact:
        raise StateCorruptionError("complete campaign has no surviving refined trial")
    bh = max(with_intact)
    peaks = [
        t.peak_force_n for t in by_height[bh]
        if t.outcome is Outcome.INTACT and t.peak_force_n is not None
    ]
    # fsum keeps the mean independent of trial ordering within the height
    return CampaignResult(
        breaking_height_cm=from_tenths(bh),
        breaking_force_n=math.fsum(peaks) / len(peaks),
    )


def next_action(state: CampaignState) -> Drop | Finished:
    """The deterministic next step implied by the trial log."""
    scan = _scan(state.config, state.trials)
    if scan.phase is not state.phase:
        raise StateCorruptionError(
            f"stored phase {state.phase.value!r} inconsistent with ledger "
            f"(expected {scan.phase.value!r})"
        )
    if scan.phase is Phase.COMPLETE:
        if state.result is None:
            raise StateCorruptionError("complete campaign is missing its result")
        return FINISHED
    if scan.out_of_range is not None:
        raise CampaignRangeError(scan.out_of_range)
    return Drop(height_cm=from_tenths(scan.pending_tenths))


def record_trial(
    state: CampaignState,
    height_cm: float,
    outcome: Outcome,
    peak_force_n: float | None = None,
    idempotency_key: str | None = None,
    trace_id: str | None = None,
) -> CampaignState:
    """Append one trial at the pending height and apply phase transitions.

    Re-recording with an idempotency key already present in the log returns
    the state unchanged. Intact trials must carry a peak force; broken
    trials must not (the impact force of a breaking trial cannot be read
    off the force-time graph).
    """
    if idempotency_key is not None:
        for tr in state.trials:
            if tr.idempotency_key == idempotency_key:
                return state
    action = next_action(state)
    if isinstance(action, Finished):
        raise ProtocolViolationError("campaign is complete; no trial is pending")
    height_tenths = to_tenths(height_cm)
    if height_tenths != to_tenths(action.height_cm):
        raise ProtocolViolationError(
            f"trial at {height_cm} cm but pending height is {action.height_cm} cm"
        )
    if outcome is Outcome.INTACT:
        if peak_force_n is None:
            raise MissingMeasurementError("intact trial requires its measured peak force")
        if not (peak_force_n > 0) or not math.isfinite(peak_force_n):
            raise InvalidInputError(f"peak force must be positive, got {peak_force_n}")
    elif peak_force_n is not None:
        raise InvalidInputError(
            "broken trials record no peak force (first peak is not the impact force)"
        )
    index = len(state.trials)
    tr = TrialRecord(
        trial_index=index,
        height_tenths=height_tenths,
        outcome=outcome,
        peak_force_n=peak_force_n,
        idempotency_key=idempotency_key or f"trial-{height_tenths}-{index}",
        trace_id=trace_id,
    )
    trials = state.trials + (tr,)
    scan = _scan(state.config, trials)
    new_state = replace(state, trials=trials, phase=scan.phase)
    if scan.phase is Phase.COMPLETE and state.result is None:
        new_state = replace(new_state, result=_derive_result(new_state, scan))
    return new_state


def attach_analysis(state: CampaignState, trial_index: int, analysis: TrialAnalysis) -> CampaignState:
    """Attach a trace analysis to an already-recorded trial."""
    if not (0 <= trial_index < len(state.trials)):
        raise InvalidInputError(f"no trial with index {trial_index}")
    trials = list(state.trials)
    trials[trial_index] = replace(trials[trial_index], analysis=analysis)
    return replace(state, trials=tuple(trials))


def breaking_height(state: CampaignState) -> float:
    """Highest refined height with at least one surviving trial, cm."""
    if state.phase is not Phase.COMPLETE or state.result is None:
        raise NotReadyError("breaking height is defined only once the campaign completes")
    return state.result.breaking_height_cm


def breaking_force(state: CampaignState) -> float:
    """Mean peak force of the surviving trials at the breaking height, N."""
    if state.phase is not Phase.COMPLETE or state.result is None:
        raise NotReadyError("breaking force is defined only once the campaign completes")
    return state.result.breaking_force_n


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def _non_monotone_heights(state: CampaignState) -> list[float]:
    """Refined heights that broke on every trial while a higher refined
    height had survivors -- physically inverted, flagged rather than resolved."""
    scan = _scan(state.config, state.trials)
    by_height: dict[int, list[TrialRecord]] = {}
    for tr in _refine_trials(state, scan.first_break_tenths):
        by_height.setdefault(tr.height_tenths, []).append(tr)
    full = {
        h: trs for h, trs in by_height.items() if len(trs) >= state.config.trials_per_height
    }
    intact_heights = [
        h for h, trs in full.items() if any(t.outcome is Outcome.INTACT for t in trs)
    ]
    if not intact_heights:
        return []
    top_intact = max(intact_heights)
    return sorted(
        from_tenths(h)
        for h, trs in full.items()
        if h < top_intact and not any(t.outcome is Outcome.INTACT for t in trs)
    )


def campaign_report(state: CampaignState) -> dict:
    """Serializable summary: part, config, ladder, result, disagreements."""
    ladder = []
    for h in sorted(state.ledger()):
        trs = state.ledger()[h]
        ladder.append(
            {
                "height_cm": from_tenths(h),
                "trials": [
                    {
                        "trial_index": t.trial_index,
                        "outcome": t.outcome.value,
                        "peak_force_n": t.peak_force_n,
                        "disagreement": t.disagreement,
                    }
                    for t in trs
                ],
            }
        )
    return {
        "schema_version": SCHEMA_VERSION,
        "part": state.part.to_dict(),
        "config": state.config.to_dict(),
        "phase": state.phase.value,
        "trial_count": len(state.trials),
        "ladder": ladder,
        "result": None if state.result is None else state.result.to_dict(),
        "disagreements": [t.trial_index for t in state.trials if t.disagreement],
        "non_monotone_heights_cm": _non_monotone_heights(state),
    }


def ladder_csv(state: CampaignState) -> str:
    """Campaign ledger as a height-per-row table: one column per trial slot,
    an average column, N/A for broken trials, blank for unfilled slots."""
    n = state.config.trials_per_height
    header = ["height_cm"] + [f"t{i + 1}_n" for i in range(n)] + ["average_n"]
    rows = [",".join(header)]
    for h in sorted(state.ledger()):
        trs = state.ledger()[h]
        cells = []
        for i in range(n):
            if i >= len(trs):
                cells.append("")
            elif trs[i].outcome is Outcome.BROKE:
                cells.append("N/A")
            else:
                cells.append(f"{trs[i].peak_force_n:g}")
        peaks = [t.peak_force_n for t in trs if t.outcome is Outcome.INTACT]
        avg = f"{sum(peaks) / len(peaks):g}" if peaks else "N/A"
        rows.append(",".join([f"{from_tenths(h):g}"] + cells + [avg]))
    return "\n".join(rows) + "\n"


def replay(part: PartSpec, config: CampaignConfig, trials) -> CampaignState:
    """Rebuild a state by replaying trial records in order."""
    state = new_campaign(part, config)
    for tr in trials:
        state = record_trial(
            state,
            tr.height_cm,
            tr.outcome,
            peak_force_n=tr.peak_force_n,
            idempotency_key=tr.idempotency_key,
            trace_id=tr.trace_id,
        )
        if tr.analysis is not None:
            state = attach_analysis(state, tr.trial_index, tr.analysis)
    return state
