"""Closed-form mechanics used throughout the toolkit.

Section stresses for a reduced circular shaft, the plane-stress Von Mises
combination, load-cell voltage-to-force conversion, the energy-balance
impact-force estimate, and the theoretical-vs-actual validation error.

All functions are pure and work in SI units (m, kg, s, N, Pa). Millimetres
and centimetres appear only at I/O boundaries; convert before calling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateKinematicsError, InvalidInputError, SeveredSectionError

GRAVITY_M_S2 = 9.81


@dataclass(frozen=True)
class SectionLoad:
    """Loading on a reduced circular section."""

    torque_nm: float = 0.0  # applied torque magnitude, N*m
    moment_nm: float = 0.0  # bending moment magnitude, N*m
    diameter_m: float = 0.0  # reduced shaft diameter, m

    def __post_init__(self):
        if not (self.diameter_m > 0):
            raise InvalidInputError(f"diameter must be positive, got {self.diameter_m}")
        if self.torque_nm < 0 or self.moment_nm < 0:
            raise InvalidInputError("torque and moment are magnitudes; must be >= 0")


@dataclass(frozen=True)
class PlaneStress:
    """Plane-stress state at a point."""

    sigma_x_pa: float = 0.0
    sigma_y_pa: float = 0.0
    tau_xy_pa: float = 0.0

    def __post_init__(self):
        for name in ("sigma_x_pa", "sigma_y_pa", "tau_xy_pa"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite")


@dataclass(frozen=True)
class ImpactInputs:
    """Inputs to the energy-balance impact-force estimate."""

    mass_kg: float
    velocity_m_s: float  # max speed before impact
    stopping_distance_m: float  # resting minus lowest position

    def __post_init__(self):
        if not (self.mass_kg > 0):
            raise InvalidInputError(f"mass must be positive, got {self.mass_kg}")
        if self.velocity_m_s < 0:
            raise InvalidInputError("velocity is a speed; must be >= 0")


@dataclass(frozen=True)
class RigCalibration:
    """Load-cell chain calibration."""

    volts_to_newtons: float = 20.0  # amplifier scaling, N per V
    display_resolution_n: float = 0.01

    def __post_init__(self):
        if not (self.volts_to_newtons > 0):
            raise InvalidInputError("volts_to_newtons scale must be positive")


def torsional_stress(load: SectionLoad) -> float:
    """Shear stress 16*T/(pi*d^3) at the surface of a circular shaft, Pa."""
    return 16.0 * load.torque_nm / (math.pi * load.diameter_m**3)


def bending_stress(load: SectionLoad) -> float:
    """Bending stress 32*M/(pi*d^3) at the surface of a circular shaft, Pa."""
    return 32.0 * load.moment_nm / (math.pi * load.diameter_m**3)


def von_mises(stress: PlaneStress) -> float:
    """Equivalent stress sqrt(sx^2 - sx*sy + sy^2 + 3*txy^2), Pa.

    Plane-stress form: reduces to |sx| uniaxially and sqrt(3)*|txy| in pure
    shear, and is always real and non-negative.
    """
    sx, sy, t = stress.sigma_x_pa, stress.sigma_y_pa, stress.tau_xy_pa
    return math.sqrt(sx * sx - sx * sy + sy * sy + 3.0 * t * t)


def voltage_to_force(v_peak: float, cal: RigCalibration = RigCalibration()) -> float:
    """Convert a baseline-corrected peak voltage to newtons."""
    if v_peak < 0:
        raise InvalidInputError(
            f"peak voltage must be >= 0 after baseline correction, got {v_peak}"
        )
    return cal.volts_to_newtons * v_peak


def theoretical_impact_force(inp: ImpactInputs) -> float:
    """Energy-balance impact force m*v^2/(2*d_stop), N.

    Equates kinetic energy before impact with work done over the stopping
    distance; an upper bound since it assumes no losses.
    """
    if not (inp.stopping_distance_m > 0):
        raise DegenerateKinematicsError(
            f"stopping distance must be positive, got {inp.stopping_distance_m}"
        )
    return inp.mass_kg * inp.velocity_m_s**2 / (2.0 * inp.stopping_distance_m)


def validation_error_pct(f_theoretical_n: float, f_actual_n: float) -> float:
    """Percentage error 100*(theoretical - actual)/actual.

    Positive when theory exceeds measurement, as expected for a lossless
    theoretical estimate.
    """
    if not (f_actual_n > 0):
        raise InvalidInputError(f"actual force must be positive, got {f_actual_n}")
    return 100.0 * (f_theoretical_n - f_actual_n) / f_actual_n


def slot_section_screen(
    applied_force_n: float,
    lever_arm_m: float,
    section_width_m: float,
    section_height_m: float,
    slot_depth_m: float,
) -> float:
    """Net-section bending screen for a slotted rectangular beam, Pa.

    Estimates the equivalent stress at the slot root: bending moment
    F*arm over the remaining rectangle (height - slot depth), via M*c/I,
    fed through the Von Mises combination with no transverse terms.
    Strictly increasing in slot depth. A coarse screen for ranking slot
    depths, not a failure prediction.
    """
    for name, val in (
        ("lever_arm_m", lever_arm_m),
        ("section_width_m", section_width_m),
        ("section_height_m", section_height_m),
    ):
        if not (val > 0):
            raise InvalidInputError(f"{name} must be positive, got {val}")
    if slot_depth_m < 0:
        raise InvalidInputError(f"slot depth must be >= 0, got {slot_depth_m}")
    if applied_force_n < 0:
        raise InvalidInputError(f"applied force must be >= 0, got {applied_force_n}")
    if slot_depth_m >= section_height_m:
        raise SeveredSectionError(
            f"slot depth {slot_depth_m} m severs the {section_height_m} m section"
        )
    remaining = section_height_m - slot_depth_m
    moment = applied_force_n * lever_arm_m
    inertia = section_width_m * remaining**3 / 12.0
    sigma = moment * (remaining / 2.0) / inertia
    return von_mises(PlaneStress(sigma_x_pa=sigma))
