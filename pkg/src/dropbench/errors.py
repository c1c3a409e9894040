"""Exception types shared across the toolkit.

Every error raised by dropbench derives from DropBenchError so callers can
catch the whole family at API or CLI boundaries.
"""


class DropBenchError(Exception):
    """Base class for all dropbench errors."""


class InvalidInputError(DropBenchError, ValueError):
    """A value violates a documented precondition (non-positive diameter, etc.)."""


class SeveredSectionError(InvalidInputError):
    """Slot depth consumes the whole section; no material remains."""


class DegenerateKinematicsError(DropBenchError):
    """Kinematics unusable for the energy-balance estimate (d_stop <= 0)."""


class TraceError(DropBenchError):
    """Base for trace ingestion/validation problems."""


class TraceParseError(TraceError):
    """Malformed CSV row or header; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message if line_no is None else f"line {line_no}: {message}")
        self.line_no = line_no


class TraceSequenceError(TraceError):
    """Timestamps not strictly increasing."""


class TraceTooShortError(TraceError):
    """Trace has fewer samples than analysis requires."""


class NoImpactError(DropBenchError):
    """Force trace never rises above baseline noise."""


class SynchronizationError(DropBenchError):
    """Force and kinematic traces do not cover a common time interval."""


class ProtocolViolationError(DropBenchError):
    """Trial recorded at a height that is not the pending action."""


class MissingMeasurementError(DropBenchError):
    """Intact trial recorded without its peak force."""


class NotReadyError(DropBenchError):
    """Result requested before the campaign completed."""


class StateCorruptionError(DropBenchError):
    """Campaign ledger is inconsistent with its recorded phase."""


class CampaignRangeError(DropBenchError):
    """Next drop would fall outside the rig's usable height range."""


class InfeasibleTargetError(DropBenchError):
    """Target breakaway force is at or below the functional strength floor."""


class EntryNotFoundError(DropBenchError, LookupError):
    """No strength-table entry for the requested (slot depth, wall loops)."""


class IntegrationError(DropBenchError):
    """Simulation step too large for the configured contact stiffness."""
