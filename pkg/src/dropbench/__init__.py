"""Drop-test bench toolkit.

Trace analysis of load-cell and motion-capture data, theoretical-vs-actual
impact-force validation, an adaptive breaking-height search state machine,
empirical design-parameter recommendation, and a synthetic rig simulator
used as a testing oracle. The service subpackage adds persistence, an HTTP
API, and the command-line interface.
"""

from .advisor import (
    MergeResult,
    Recommendation,
    StrengthEntry,
    StrengthTable,
    builtin_table,
    merge_campaign_result,
    recommend,
    validate_monotonicity,
)
from .campaign import (
    CampaignConfig,
    CampaignResult,
    CampaignState,
    Drop,
    FINISHED,
    Finished,
    Outcome,
    PartSpec,
    Phase,
    PrintOrientation,
    TrialRecord,
    attach_analysis,
    breaking_force,
    breaking_height,
    campaign_report,
    ladder_csv,
    new_campaign,
    next_action,
    record_trial,
    replay,
)
from .errors import DropBenchError
from .mechanics import (
    GRAVITY_M_S2,
    ImpactInputs,
    PlaneStress,
    RigCalibration,
    SectionLoad,
    bending_stress,
    slot_section_screen,
    theoretical_impact_force,
    torsional_stress,
    validation_error_pct,
    voltage_to_force,
    von_mises,
)
from .simrig import FixtureTrial, SimConfig, SimTruth, generate_campaign_fixture, simulate_drop
from .trace import (
    ForceTrace,
    KinSummary,
    KinTrace,
    Signature,
    TrialAnalysis,
    analyze_trial,
    classify_signature,
    force_trace_csv,
    ingest_force_trace,
    ingest_kin_trace,
    kin_trace_csv,
    kinematic_summary,
    peak_force,
)

__version__ = "0.1.0"
