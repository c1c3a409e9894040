"""Synthetic drop-rig simulator with known ground truth.

Models a guided free fall onto a spring-damper contact and emits the same
CSV trace formats the analysis pipeline ingests, together with a truth
sidecar. Used as the independent oracle for trace analysis, campaign logic,
and end-to-end tests.

Model summary:
  * Free fall: the marker descends with effective acceleration eta^2 * g so
    the impact speed is eta * sqrt(2 g h); eta lumps rail friction and other
    pre-impact losses into one factor.
  * Contact: penetration x below the contact surface obeys
    m x'' = m g - F with F = max(0, k x + c x'), integrated with fixed-step
    semi-implicit Euler at 100 kHz and resampled to the sensor rates.
  * Break: if the contact force reaches the part's threshold the part
    snaps: the transmitted force drops to a decaying fraction of the break
    force, the basket falls through a small collapse gap, then lands on a
    stiffer second contact -- producing the reduced-first-peak morphology
    of a breaking trial.
  * After the first contact the rebound is damped out (rig friction), so
    the trace relaxes to the static rest level instead of bouncing.

Everything is deterministic given the seed; only the voltage channel
carries noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import IntegrationError, InvalidInputError
from .mechanics import GRAVITY_M_S2 as G
from .trace import ForceTrace, KinTrace, force_trace_csv, kin_trace_csv

SURFACE_Z_MM = 700.0  # marker height when the basket touches the load cell
VOLTS_PER_NEWTON = 1.0 / 20.0  # amplifier calibration, 1 V = 20 N

SIM_DT_S = 1e-5  # contact integration step (100 kHz)
DWELL_S = 0.30  # hold at the release height before the drop
DRESS_S = 0.45  # post-contact relaxation to rest
TAIL_S = 0.60  # hold at rest (covers the analyzer's rest window)
DRESS_TAU_S = 0.06
CONTACT_TIMEOUT_S = 2.0

BREAK_FORCE_FRACTION = 0.4  # transmitted force right after the part snaps
BREAK_DECAY_S = 0.0015
BREAK_COLLAPSE_GAP_M = 0.002  # extra travel before the basket lands directly
BASKET_STIFFNESS_FACTOR = 1.5


@dataclass(frozen=True)
class SimConfig:
    """One simulated drop."""

    mass_kg: float
    drop_height_cm: float
    rail_efficiency: float = 0.85  # impact speed as a fraction of ideal free fall
    contact_stiffness_n_m: float = 25000.0
    contact_damping_ns_m: float = 8.0
    part_break_threshold_n: float | None = None
    noise_sigma_v: float = 0.005
    force_rate_hz: float = 2000.0
    kin_rate_hz: float = 200.0
    seed: int = 0

    def __post_init__(self):
        if not (self.mass_kg > 0):
            raise InvalidInputError(f"mass must be positive, got {self.mass_kg}")
        if self.drop_height_cm < 0:
            raise InvalidInputError(f"drop height must be >= 0, got {self.drop_height_cm}")
        if not (0 < self.rail_efficiency <= 1):
            raise InvalidInputError("rail efficiency must be in (0, 1]")
        if not (self.contact_stiffness_n_m > 0):
            raise InvalidInputError("contact stiffness must be positive")
        if self.contact_damping_ns_m < 0:
            raise InvalidInputError("contact damping must be >= 0")
        if self.noise_sigma_v < 0:
            raise InvalidInputError("noise sigma must be >= 0")
        if self.force_rate_hz <= 0 or self.kin_rate_hz <= 0:
            raise InvalidInputError("sensor rates must be positive")
        if self.part_break_threshold_n is not None and not (self.part_break_threshold_n > 0):
            raise InvalidInputError("break threshold must be positive when set")


@dataclass(frozen=True)
class SimTruth:
    """Exact internal quantities of one simulated drop."""

    v_impact_m_s: float
    peak_force_n: float
    broke: bool
    d_stop_m: float  # max penetration beyond the final rest level

    def to_dict(self) -> dict:
        return {
            "v_impact_m_s": self.v_impact_m_s,
            "peak_force_n": self.peak_force_n,
            "broke": self.broke,
            "d_stop_m": self.d_stop_m,
        }


@dataclass(frozen=True)
class FixtureTrial:
    """One generated campaign trial: traces plus truth."""

    height_cm: float
    trial_index: int
    force: ForceTrace
    kin: KinTrace
    truth: SimTruth


def _integrate_contact(cfg: SimConfig, v_impact: float):
    """Step the contact dynamics until liftoff, settle, or timeout.

    Returns (knot_t, knot_x, knot_f, x_max, broke, x_rest, t_exit, x_exit)
    with times relative to first contact.
    """
    m = cfg.mass_kg
    k = cfg.contact_stiffness_n_m
    c = cfg.contact_damping_ns_m
    k2 = BASKET_STIFFNESS_FACTOR * k
    threshold = cfg.part_break_threshold_n
    dt = SIM_DT_S

    omega_max = math.sqrt(k2 / m)
    if omega_max * dt > 0.1:
        raise IntegrationError(
            f"contact stiffness {k} N/m needs a step below "
            f"{0.1 / omega_max:.2e} s; the fixed {dt:.0e} s step is unstable"
        )

    stage = "part"  # part -> (transient -> basket) on break
    t = 0.0
    x = 0.0
    w = v_impact  # positive down
    x_break = 0.0
    f_break = 0.0
    t_break = 0.0
    x_offset = 0.0
    broke = False

    ts, xs, fs = [], [], []
    x_max = 0.0
    while True:
        if stage == "part":
            raw = k * x + c * w
            f = max(0.0, raw)
            if threshold is not None and f >= threshold and not broke:
                broke = True
                stage = "transient"
                t_break, f_break, x_break = t, f, x
        elif stage == "transient":
            f = BREAK_FORCE_FRACTION * f_break * math.exp(-(t - t_break) / BREAK_DECAY_S)
            if x >= x_break + BREAK_COLLAPSE_GAP_M:
                stage = "basket"
                x_offset = x_break + BREAK_COLLAPSE_GAP_M
        if stage == "basket":
            f = max(0.0, k2 * (x - x_offset) + c * w) + BREAK_FORCE_FRACTION * f_break * math.exp(
                -(t - t_break) / BREAK_DECAY_S
            )

        ts.append(t)
        xs.append(x)
        fs.append(f)
        x_max = max(x_max, x)

        w += dt * (G - f / m)
        x += dt * w
        t += dt

        floor = x_offset if stage == "basket" else 0.0
        if t > 2 * dt and w < 0 and x <= floor:
            break  # liftoff: rebound is damped out by the rig from here
        x_eq = floor + m * G / (k2 if stage == "basket" else k)
        if stage in ("part", "basket") and abs(x - x_eq) < 1e-7 and abs(w) < 1e-4:
            break  # settled without lifting off
        if t > CONTACT_TIMEOUT_S:
            break

    x_rest = x_offset + m * G / k2 if broke else m * G / k
    return (
        np.array(ts),
        np.array(xs),
        np.array(fs),
        x_max,
        broke,
        x_rest,
        t,
        x,
    )


def _dress_position(s: float, x_exit: float, x_rest: float) -> float:
    """Critically-damped relaxation from the exit state to rest."""
    u = s / DRESS_TAU_S
    return x_rest + (x_exit - x_rest) * (1.0 + u) * math.exp(-u)


def _dress_force(s: float, x_exit: float, x_rest: float, mass: float) -> float:
    u = s / DRESS_TAU_S
    accel = (x_exit - x_rest) * math.exp(-u) * (u - 1.0) / DRESS_TAU_S**2
    return max(0.0, mass * (G - accel))


def simulate_drop(cfg: SimConfig) -> tuple[ForceTrace, KinTrace, SimTruth]:
    """Simulate one drop and return (force trace, kinematic trace, truth)."""
    m = cfg.mass_kg
    h = cfg.drop_height_cm / 100.0
    g_eff = cfg.rail_efficiency**2 * G
    v_impact = cfg.rail_efficiency * math.sqrt(2.0 * G * h)

    if h == 0.0:
        # Static settle: the basket is placed, not dropped.
        x_rest = m * G / cfg.contact_stiffness_n_m
        total = DWELL_S + DRESS_S + TAIL_S
        truth = SimTruth(v_impact_m_s=0.0, peak_force_n=m * G, broke=False, d_stop_m=0.0)

        def z_at(t: float) -> float:
            return SURFACE_Z_MM - x_rest * 1000.0

        def f_at(t: float) -> float:
            return m * G

    else:
        t_fall = v_impact / g_eff
        t_contact = DWELL_S + t_fall
        knot_t, knot_x, knot_f, x_max, broke, x_rest, t_exit, x_exit = _integrate_contact(
            cfg, v_impact
        )
        t_dress = t_contact + t_exit
        total = t_dress + DRESS_S + TAIL_S
        truth = SimTruth(
            v_impact_m_s=v_impact,
            peak_force_n=float(np.max(knot_f)),
            broke=broke,
            d_stop_m=x_max - x_rest,
        )
        z_start = SURFACE_Z_MM + h * 1000.0

        def z_at(t: float) -> float:
            if t <= DWELL_S:
                return z_start
            if t <= t_contact:
                return z_start - 0.5 * g_eff * (t - DWELL_S) ** 2 * 1000.0
            if t <= t_dress:
                return SURFACE_Z_MM - float(np.interp(t - t_contact, knot_t, knot_x)) * 1000.0
            if t <= t_dress + DRESS_S:
                return SURFACE_Z_MM - _dress_position(t - t_dress, x_exit, x_rest) * 1000.0
            return SURFACE_Z_MM - x_rest * 1000.0

        def f_at(t: float) -> float:
            if t <= t_contact:
                return 0.0
            if t <= t_dress:
                return float(np.interp(t - t_contact, knot_t, knot_f))
            if t <= t_dress + DRESS_S:
                return _dress_force(t - t_dress, x_exit, x_rest, m)
            return m * G

    rng = np.random.default_rng(cfg.seed)
    n_force = int(total * cfg.force_rate_hz) + 1
    t_force = np.arange(n_force) / cfg.force_rate_hz
    volts = np.array([f_at(t) for t in t_force]) * VOLTS_PER_NEWTON
    if cfg.noise_sigma_v > 0:
        volts = volts + rng.normal(0.0, cfg.noise_sigma_v, size=n_force)

    n_kin = int(total * cfg.kin_rate_hz) + 1
    t_kin = np.arange(n_kin) / cfg.kin_rate_hz
    z = np.array([z_at(t) for t in t_kin])

    force = ForceTrace(t_force, volts, nominal_rate_hz=cfg.force_rate_hz)
    kin = KinTrace(t_kin, z, nominal_rate_hz=cfg.kin_rate_hz)
    return force, kin, truth


def generate_campaign_fixture(
    part_strength_n: float,
    template: SimConfig,
    heights_cm: list[float],
    rail_jitter: float = 0.01,
) -> list[FixtureTrial]:
    """One simulated trial per requested height, with per-trial rail jitter.

    Real rigs show trial-to-trial spread from release and friction
    variability; a small seeded jitter on the rail efficiency reproduces
    the mixed broke/intact rows seen near the threshold. Deterministic for
    a fixed template seed.
    """
    if any(h <= 0 for h in heights_cm):
        raise InvalidInputError("fixture heights must be positive")
    rng = np.random.default_rng(template.seed)
    threshold = None if math.isinf(part_strength_n) else part_strength_n
    trials = []
    for j, h in enumerate(heights_cm):
        eta = template.rail_efficiency * (1.0 + rng.normal(0.0, rail_jitter))
        eta = min(1.0, max(0.05, eta))
        cfg = replace(
            template,
            drop_height_cm=h,
            rail_efficiency=eta,
            part_break_threshold_n=threshold,
            seed=template.seed + 1000 * (j + 1),
        )
        force, kin, truth = simulate_drop(cfg)
        trials.append(FixtureTrial(height_cm=h, trial_index=j, force=force, kin=kin, truth=truth))
    return trials


def write_drop_files(
    force: ForceTrace, kin: KinTrace, truth: SimTruth, out_dir: str | Path
) -> dict[str, Path]:
    """Write force.csv, kin.csv, and truth.json into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "force": out / "force.csv",
        "kin": out / "kin.csv",
        "truth": out / "truth.json",
    }
    paths["force"].write_text(force_trace_csv(force))
    paths["kin"].write_text(kin_trace_csv(kin))
    paths["truth"].write_text(json.dumps(truth.to_dict(), indent=2, sort_keys=True) + "\n")
    return paths
