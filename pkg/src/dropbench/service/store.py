"""File-backed campaign store: JSON snapshots plus an append-only trial log.

Layout under the store root:

    campaigns/{id}/snapshot.json   # canonical JSON cache of the state
    campaigns/{id}/log.ndjson      # append-only event log (the authority)
    traces/{sha}/force.csv         # content-addressed uploaded trace pairs
    traces/{sha}/kin.csv

The log is written first and the snapshot second, atomically; on load the
state is rebuilt by replaying the log, so a crash between the two writes
loses nothing. Writes are serialized per campaign id.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .. import campaign as cp
from ..errors import DropBenchError, InvalidInputError
from ..trace import TrialAnalysis


class UnknownCampaignError(DropBenchError, KeyError):
    pass


class UnknownTraceError(DropBenchError, KeyError):
    pass


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


@dataclass
class CampaignDoc:
    """A campaign's state plus log-derived annotations."""

    campaign_id: str
    state: cp.CampaignState
    analysis_errors: dict[int, str] = field(default_factory=dict)

    def snapshot(self) -> dict:
        doc = self.state.to_dict()
        doc["campaign_id"] = self.campaign_id
        doc["analysis_errors"] = {str(k): v for k, v in sorted(self.analysis_errors.items())}
        for trial in doc["trials"]:
            trial["analysis_status"] = self._status(trial)
        return doc

    def _status(self, trial_dict: dict) -> str:
        idx = trial_dict["trial_index"]
        if trial_dict["analysis"] is not None:
            return "done"
        if idx in self.analysis_errors:
            return "failed"
        if trial_dict["trace_id"] is not None:
            return "pending"
        return "none"


class CampaignStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "campaigns").mkdir(parents=True, exist_ok=True)
        (self.root / "traces").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- locking ------------------------------------------------------------

    def lock_for(self, campaign_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(campaign_id, threading.Lock())

    # -- paths --------------------------------------------------------------

    def _campaign_dir(self, campaign_id: str) -> Path:
        return self.root / "campaigns" / campaign_id

    def _log_path(self, campaign_id: str) -> Path:
        return self._campaign_dir(campaign_id) / "log.ndjson"

    def _snapshot_path(self, campaign_id: str) -> Path:
        return self._campaign_dir(campaign_id) / "snapshot.json"

    # -- campaign lifecycle ---------------------------------------------------

    def create_campaign(
        self, part: cp.PartSpec, config: cp.CampaignConfig, campaign_id: str | None = None
    ) -> CampaignDoc:
        campaign_id = campaign_id or uuid.uuid4().hex[:12]
        cdir = self._campaign_dir(campaign_id)
        if cdir.exists():
            raise InvalidInputError(f"campaign {campaign_id} already exists")
        cdir.mkdir(parents=True)
        doc = CampaignDoc(campaign_id=campaign_id, state=cp.new_campaign(part, config))
        self._append_event(
            campaign_id,
            {
                "type": "created",
                "campaign_id": campaign_id,
                "part": part.to_dict(),
                "config": config.to_dict(),
            },
        )
        self._write_snapshot(doc)
        return doc

    def list_campaigns(self) -> list[str]:
        return sorted(p.name for p in (self.root / "campaigns").iterdir() if p.is_dir())

    def load(self, campaign_id: str) -> CampaignDoc:
        """Rebuild the state by replaying the event log."""
        log_path = self._log_path(campaign_id)
        if not log_path.exists():
            raise UnknownCampaignError(f"no campaign {campaign_id!r}")
        doc: CampaignDoc | None = None
        for no, line in enumerate(log_path.read_text().splitlines(), start=1):
            event = json.loads(line)
            kind = event["type"]
            if kind == "created":
                doc = CampaignDoc(
                    campaign_id=event["campaign_id"],
                    state=cp.new_campaign(
                        cp.PartSpec.from_dict(event["part"]),
                        cp.CampaignConfig.from_dict(event["config"]),
                    ),
                )
            elif doc is None:
                raise DropBenchError(f"{log_path}:{no}: event before campaign creation")
            elif kind == "trial":
                tr = cp.TrialRecord.from_dict(event["trial"])
                doc.state = cp.record_trial(
                    doc.state,
                    tr.height_cm,
                    tr.outcome,
                    peak_force_n=tr.peak_force_n,
                    idempotency_key=tr.idempotency_key,
                    trace_id=tr.trace_id,
                )
            elif kind == "analysis":
                doc.state = cp.attach_analysis(
                    doc.state, event["trial_index"], TrialAnalysis.from_dict(event["analysis"])
                )
            elif kind == "analysis_failed":
                doc.analysis_errors[event["trial_index"]] = event["error"]
            else:
                raise DropBenchError(f"{log_path}:{no}: unknown event type {kind!r}")
        if doc is None:
            raise DropBenchError(f"{log_path}: empty event log")
        return doc

    # -- mutations ------------------------------------------------------------

    def record_trial(
        self,
        campaign_id: str,
        height_cm: float,
        outcome: cp.Outcome,
        peak_force_n: float | None = None,
        idempotency_key: str | None = None,
        trace_id: str | None = None,
    ) -> tuple[CampaignDoc, cp.TrialRecord, bool]:
        """Record one trial. Returns (doc, trial, created); created is False
        when the idempotency key had already been seen."""
        with self.lock_for(campaign_id):
            doc = self.load(campaign_id)
            if idempotency_key is not None:
                for tr in doc.state.trials:
                    if tr.idempotency_key == idempotency_key:
                        return doc, tr, False
            if trace_id is not None:
                self._require_trace(trace_id)
            doc.state = cp.record_trial(
                doc.state,
                height_cm,
                outcome,
                peak_force_n=peak_force_n,
                idempotency_key=idempotency_key,
                trace_id=trace_id,
            )
            trial = doc.state.trials[-1]
            self._append_event(campaign_id, {"type": "trial", "trial": trial.to_dict()})
            self._write_snapshot(doc)
            return doc, trial, True

    def attach_analysis(
        self, campaign_id: str, trial_index: int, analysis: TrialAnalysis
    ) -> CampaignDoc:
        with self.lock_for(campaign_id):
            doc = self.load(campaign_id)
            doc.state = cp.attach_analysis(doc.state, trial_index, analysis)
            self._append_event(
                campaign_id,
                {"type": "analysis", "trial_index": trial_index, "analysis": analysis.to_dict()},
            )
            self._write_snapshot(doc)
            return doc

    def record_analysis_failure(self, campaign_id: str, trial_index: int, error: str) -> CampaignDoc:
        with self.lock_for(campaign_id):
            doc = self.load(campaign_id)
            doc.analysis_errors[trial_index] = error
            self._append_event(
                campaign_id,
                {"type": "analysis_failed", "trial_index": trial_index, "error": error},
            )
            self._write_snapshot(doc)
            return doc

    # -- traces ---------------------------------------------------------------

    def put_trace_pair(self, force_csv: str, kin_csv: str) -> str:
        digest = hashlib.sha256(
            force_csv.encode() + b"\x00" + kin_csv.encode()
        ).hexdigest()
        tdir = self.root / "traces" / digest
        if not tdir.exists():
            tdir.mkdir(parents=True)
            (tdir / "force.csv").write_text(force_csv)
            (tdir / "kin.csv").write_text(kin_csv)
        return digest

    def get_trace_pair(self, trace_id: str) -> tuple[str, str]:
        tdir = self._require_trace(trace_id)
        return (tdir / "force.csv").read_text(), (tdir / "kin.csv").read_text()

    def _require_trace(self, trace_id: str) -> Path:
        tdir = self.root / "traces" / trace_id
        if not tdir.is_dir():
            raise UnknownTraceError(f"no trace {trace_id!r}")
        return tdir

    # -- files ----------------------------------------------------------------

    def _append_event(self, campaign_id: str, event: dict):
        line = json.dumps(event, sort_keys=True)
        with open(self._log_path(campaign_id), "a") as fh:
            fh.write(line + "\n")
            fh.flush()

    def _write_snapshot(self, doc: CampaignDoc):
        path = self._snapshot_path(doc.campaign_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(canonical_json(doc.snapshot()))
        tmp.replace(path)

    def stored_snapshot(self, campaign_id: str) -> dict:
        path = self._snapshot_path(campaign_id)
        if not path.exists():
            raise UnknownCampaignError(f"no campaign {campaign_id!r}")
        return json.loads(path.read_text())
