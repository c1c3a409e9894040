"""Rig settings file: TOML-style key=value pairs.

Example:

    # bench calibration
    scale_n_per_v = 20.0
    error_bound_pct = 25.0
    rest_window_s = 0.25
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..errors import InvalidInputError
from ..mechanics import RigCalibration


@dataclass(frozen=True)
class RigSettings:
    scale_n_per_v: float = 20.0
    error_bound_pct: float = 25.0
    rest_window_s: float = 0.25

    def calibration(self) -> RigCalibration:
        return RigCalibration(volts_to_newtons=self.scale_n_per_v)


_FIELDS = {"scale_n_per_v", "error_bound_pct", "rest_window_s"}


def load_rig_settings(path: str | Path) -> RigSettings:
    values = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{no}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise InvalidInputError(
                f"{path}:{no}: unknown setting {key!r} (expected one of {sorted(_FIELDS)})"
            )
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise InvalidInputError(f"{path}:{no}: {value.strip()!r} is not a number") from None
    return RigSettings(**values)
