"""Figure rendering for reports.

Renders force-time traces with baseline and peak annotations, kinematic
traces with the rest/lowest levels, and the campaign ladder grid. All
functions write PNG files; the CLI report paths call them alongside the
delimited output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .campaign import CampaignState, Outcome
from .mechanics import RigCalibration
from .trace import ForceTrace, KinSummary, KinTrace, TrialAnalysis


def plot_force_trace(
    trace: ForceTrace,
    path: str | Path,
    cal: RigCalibration = RigCalibration(),
    analysis: TrialAnalysis | None = None,
) -> Path:
    """Force-time plot with the baseline and detected peak marked."""
    fig, ax = plt.subplots(figsize=(8, 4))
    force = (trace.voltage_v - trace.baseline_v) * cal.volts_to_newtons
    ax.plot(trace.t_s, force, lw=0.8, color="tab:blue")
    ax.axhline(0.0, color="gray", ls="--", lw=0.8, label="baseline")
    i_peak = int(np.argmax(force))
    ax.plot(trace.t_s[i_peak], force[i_peak], "v", color="tab:red")
    label = f"peak {force[i_peak]:.1f} N"
    if analysis is not None:
        label += f" ({analysis.signature.value})"
    ax.annotate(
        label,
        xy=(trace.t_s[i_peak], force[i_peak]),
        xytext=(5, 5),
        textcoords="offset points",
    )
    ax.set_xlabel("time (s)")
    ax.set_ylabel("force (N)")
    ax.set_title("Load-cell force")
    ax.legend(loc="upper right")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_kin_trace(trace: KinTrace, path: str | Path, summary: KinSummary | None = None) -> Path:
    """Marker-position plot with rest and lowest levels when available."""
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(trace.t_s, trace.z_mm, lw=0.8, color="tab:green")
    if summary is not None:
        ax.axhline(summary.p_rest_mm, color="gray", ls="--", lw=0.8, label="rest")
        ax.axhline(summary.p_lowest_mm, color="tab:red", ls=":", lw=0.8, label="lowest")
        ax.legend(loc="upper right")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("marker z (mm)")
    ax.set_title("Basket trajectory")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_campaign_ladder(state: CampaignState, path: str | Path) -> Path:
    """Height-by-trial grid: green survived (peak annotated), red broke."""
    ledger = state.ledger()
    heights = sorted(ledger)
    n_slots = max(state.config.trials_per_height, 1)
    fig, ax = plt.subplots(figsize=(1.6 * n_slots + 2.5, 0.55 * max(len(heights), 1) + 1.5))
    for row, h in enumerate(reversed(heights)):
        for col in range(n_slots):
            trials = ledger[h]
            if col < len(trials):
                tr = trials[col]
                broke = tr.outcome is Outcome.BROKE
                color = "#e57373" if broke else "#81c784"
                text = "N/A" if broke else f"{tr.peak_force_n:g}"
            else:
                color, text = "#eeeeee", ""
            ax.add_patch(plt.Rectangle((col, row), 0.95, 0.9, color=color))
            ax.text(col + 0.475, row + 0.45, text, ha="center", va="center", fontsize=9)
        ax.text(-0.15, row + 0.45, f"{h / 10.0:g} cm", ha="right", va="center", fontsize=9)
    ax.set_xlim(-1.2, n_slots)
    ax.set_ylim(-0.3, max(len(heights), 1))
    ax.set_xticks([c + 0.475 for c in range(n_slots)])
    ax.set_xticklabels([f"t{c + 1}" for c in range(n_slots)])
    ax.set_yticks([])
    title = f"Campaign ladder (d={state.part.slot_depth_mm:g} mm, w={state.part.wall_loops})"
    if state.result is not None:
        title += (
            f" -- breaking height {state.result.breaking_height_cm:g} cm, "
            f"force {state.result.breaking_force_n:g} N"
        )
    ax.set_title(title)
    for spine in ax.spines.values():
        spine.set_visible(False)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
