"""Empirical design-parameter recommendation.

Maps a user-specific maximum permissible impact force to a (slot depth,
wall loops) print configuration from an empirical strength table. The
built-in table holds the measured campaign results; campaign outcomes can
be merged back in as they are produced.

Selection follows a never-exceed rule: the breakaway force is a safety
limit, so the strongest configuration at or below the target wins. With
only a handful of measured points, no interpolation is attempted --
recommendations are restricted to measured configurations plus directional
advice.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from pathlib import Path

from .campaign import PartSpec
from .errors import EntryNotFoundError, InfeasibleTargetError, InvalidInputError

STRENGTH_CSV_HEADER = "slot_depth_mm,wall_loops,mean_breaking_force_n"

# Minimum strength to survive normal feeding loads (high-force food scooping
# with a 2.5x safety factor).
DEFAULT_MIN_FUNCTIONAL_FORCE_N = 25.0


@dataclass(frozen=True)
class StrengthEntry:
    slot_depth_mm: float
    wall_loops: int
    mean_breaking_force_n: float

    def __post_init__(self):
        if not (self.mean_breaking_force_n > 0):
            raise InvalidInputError(
                f"breaking force must be positive, got {self.mean_breaking_force_n}"
            )


@dataclass(frozen=True)
class StrengthTable:
    entries: tuple[StrengthEntry, ...]
    f_min_functional_n: float = DEFAULT_MIN_FUNCTIONAL_FORCE_N

    def __post_init__(self):
        if not self.entries:
            raise InvalidInputError("strength table must not be empty")
        keys = [(e.slot_depth_mm, e.wall_loops) for e in self.entries]
        if len(set(keys)) != len(keys):
            raise InvalidInputError("duplicate (slot depth, wall loops) entries")

    def lookup(self, slot_depth_mm: float, wall_loops: int) -> StrengthEntry:
        for e in self.entries:
            if e.slot_depth_mm == slot_depth_mm and e.wall_loops == wall_loops:
                return e
        raise EntryNotFoundError(
            f"no entry for slot depth {slot_depth_mm} mm, {wall_loops} wall loops"
        )


@dataclass(frozen=True)
class Recommendation:
    entry: StrengthEntry
    margin_n: float  # target minus recommended force; negative on overshoot
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "slot_depth_mm": self.entry.slot_depth_mm,
            "wall_loops": self.entry.wall_loops,
            "mean_breaking_force_n": self.entry.mean_breaking_force_n,
            "margin_n": self.margin_n,
            "note": self.note,
        }


@dataclass(frozen=True)
class MergeResult:
    table: StrengthTable
    violations: tuple[str, ...]


def builtin_table() -> StrengthTable:
    """Measured mean breaking forces of the four tested print configurations."""
    return StrengthTable(
        entries=(
            StrengthEntry(1.0, 6, 75.6),
            StrengthEntry(1.0, 3, 65.0),
            StrengthEntry(2.0, 6, 53.1),
            StrengthEntry(2.0, 3, 45.0),
        )
    )


def validate_monotonicity(table: StrengthTable) -> list[str]:
    """Check the expected physical orderings; returns violations, never raises.

    For entries sharing one parameter: force strictly decreases as the slot
    deepens and strictly increases with more wall loops.
    """
    violations = []
    es = table.entries
    for a in es:
        for b in es:
            if a.wall_loops == b.wall_loops and a.slot_depth_mm < b.slot_depth_mm:
                if not (a.mean_breaking_force_n > b.mean_breaking_force_n):
                    violations.append(
                        f"force should decrease with slot depth at w={a.wall_loops}: "
                        f"d={a.slot_depth_mm} gives {a.mean_breaking_force_n} N, "
                        f"d={b.slot_depth_mm} gives {b.mean_breaking_force_n} N"
                    )
            if a.slot_depth_mm == b.slot_depth_mm and a.wall_loops < b.wall_loops:
                if not (a.mean_breaking_force_n < b.mean_breaking_force_n):
                    violations.append(
                        f"force should increase with wall loops at d={a.slot_depth_mm}: "
                        f"w={a.wall_loops} gives {a.mean_breaking_force_n} N, "
                        f"w={b.wall_loops} gives {b.mean_breaking_force_n} N"
                    )
    return violations


def recommend(target_f_max_n: float, table: StrengthTable | None = None) -> Recommendation:
    """Pick the configuration with the largest breaking force not above the
    target. If every configuration overshoots, return the weakest one with a
    warning and the direction to adjust (deepen the slot, drop wall loops).
    """
    if table is None:
        table = builtin_table()
    if target_f_max_n <= table.f_min_functional_n:
        raise InfeasibleTargetError(
            f"target {target_f_max_n} N is at or below the {table.f_min_functional_n} N "
            "functional floor; the attachment would break during normal feeding"
        )
    qualifying = [e for e in table.entries if e.mean_breaking_force_n <= target_f_max_n]
    if qualifying:
        chosen = max(qualifying, key=lambda e: e.mean_breaking_force_n)
        note = None
        overshooters = [e for e in table.entries if e.mean_breaking_force_n > target_f_max_n]
        if overshooters and chosen.mean_breaking_force_n < target_f_max_n:
            nearest = min(overshooters, key=lambda e: e.mean_breaking_force_n)
            note = (
                f"nearest stronger configuration (d={nearest.slot_depth_mm} mm, "
                f"w={nearest.wall_loops}) overshoots by "
                f"{nearest.mean_breaking_force_n - target_f_max_n:.1f} N; deepen the slot "
                "or reduce wall loops from there to tune closer to the target"
            )
        return Recommendation(chosen, margin_n=target_f_max_n - chosen.mean_breaking_force_n, note=note)
    weakest = min(table.entries, key=lambda e: e.mean_breaking_force_n)
    return Recommendation(
        weakest,
        margin_n=target_f_max_n - weakest.mean_breaking_force_n,
        note=(
            f"warning: every measured configuration exceeds the {target_f_max_n} N target; "
            f"weakest is {weakest.mean_breaking_force_n} N. Deepen the slot beyond "
            f"{weakest.slot_depth_mm} mm or use fewer than {weakest.wall_loops} wall loops "
            "and re-run a campaign"
        ),
    )


def merge_campaign_result(
    table: StrengthTable, part: PartSpec, breaking_force_n: float
) -> MergeResult:
    """Insert or replace the (slot depth, wall loops) entry and re-check orderings."""
    if not (breaking_force_n > 0):
        raise InvalidInputError(f"breaking force must be positive, got {breaking_force_n}")
    new_entry = StrengthEntry(part.slot_depth_mm, part.wall_loops, breaking_force_n)
    entries = tuple(
        e for e in table.entries
        if not (e.slot_depth_mm == part.slot_depth_mm and e.wall_loops == part.wall_loops)
    ) + (new_entry,)
    merged = replace(table, entries=entries)
    return MergeResult(table=merged, violations=tuple(validate_monotonicity(merged)))


def table_csv(table: StrengthTable) -> str:
    rows = [STRENGTH_CSV_HEADER]
    rows += [
        f"{e.slot_depth_mm:g},{e.wall_loops},{e.mean_breaking_force_n:g}"
        for e in table.entries
    ]
    return "\n".join(rows) + "\n"


def load_table_csv(source, f_min_functional_n: float = DEFAULT_MIN_FUNCTIONAL_FORCE_N) -> StrengthTable:
    """Parse a strength table CSV from a path, text, bytes, or file object."""
    if isinstance(source, bytes):
        text = source.decode("utf-8")
    elif isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, str) and source and "\n" not in source and Path(source).is_file():
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    else:
        raise InvalidInputError(f"unsupported source type {type(source).__name__}")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != STRENGTH_CSV_HEADER:
        raise InvalidInputError(f"expected header '{STRENGTH_CSV_HEADER}'")
    entries = []
    for no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3:
            raise InvalidInputError(f"line {no}: expected 3 columns")
        try:
            entries.append(StrengthEntry(float(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise InvalidInputError(f"line {no}: {exc}") from None
    return StrengthTable(entries=tuple(entries), f_min_functional_n=f_min_functional_n)
