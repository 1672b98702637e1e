"""Unified case store: write-through persistence plus the append-only audit log.

Layout under the store root (one file per artifact, so the whole store is
inspectable and diffable at desk scale):

    cases/<id>.json     ingested bundles       triage/<id>.json   triage results
    drafts/<id>.json    draft reports          charts/<id>.json   chart specs
    sessions/<id>.json  review sessions        notes/<id>.json    approved notes
    exports/<id>.html   exported notes         audit.log          one event/line

Audit lines are `seq|timestamp|actor|action|case_id|digest`. Events are only
ever appended; `approved`/`exported` events must carry a physician actor —
the store refuses to record them for the system actor.

Concurrency: reads are lock-free on immutable values; all writes for a given
case go through that case's lock, and audit appends are globally serialized.
Artifacts other than cases/sessions are stored as plain JSON documents; the
owning modules convert to and from their dataclasses.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Optional
from urllib.parse import quote, unquote

from . import bundle
from .errors import (
    DuplicateCase,
    MissingDraft,
    MissingSession,
    MissingTriage,
    UnknownCase,
)
from .model import PatientCase, UrgencyLabel

SYSTEM_ACTOR = "system"


class AuditAction(str, Enum):
    INGESTED = "ingested"
    TRIAGED = "triaged"
    DRAFTED = "drafted"
    EDITED = "edited"
    CONFIRMED_MEDS = "confirmed_meds"
    SET_FOLLOW_UP = "set_follow_up"
    APPROVED = "approved"
    EXPORTED = "exported"


PHYSICIAN_ONLY_ACTIONS = frozenset({AuditAction.APPROVED, AuditAction.EXPORTED})


@dataclass(frozen=True)
class AuditEvent:
    seq: int
    timestamp: datetime
    actor: str  # "system" or a physician id
    action: AuditAction
    case_id: str
    payload_digest: str

    def to_line(self) -> str:
        return "|".join(
            [
                str(self.seq),
                self.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
                self.actor,
                self.action.value,
                self.case_id,
                self.payload_digest,
            ]
        )

    @staticmethod
    def from_line(line: str) -> "AuditEvent":
        seq, ts, actor, action, case_id, digest = line.rstrip("\n").split("|", 5)
        return AuditEvent(
            seq=int(seq),
            timestamp=datetime.strptime(ts, "%Y-%m-%dT%H:%M:%SZ"),
            actor=actor,
            action=AuditAction(action),
            case_id=case_id,
            payload_digest=digest,
        )


@dataclass(frozen=True)
class QueueEntry:
    case_id: str
    label: Optional[UrgencyLabel]  # None while untriaged
    status: str  # ingested | triaged | drafted | in_review | approved


def digest_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def digest_doc(doc) -> str:
    return digest_bytes(json.dumps(doc, sort_keys=True).encode("utf-8"))


_SUBDIRS = ("cases", "triage", "drafts", "charts", "sessions", "notes", "exports")


class CaseStore:
    """Write-through store; the in-memory maps are the read cache."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        for sub in _SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._audit_path = self.root / "audit.log"
        self._audit_lock = threading.Lock()
        self._locks_guard = threading.Lock()
        self._case_locks: dict[str, threading.RLock] = {}
        self._cases: dict[str, PatientCase] = {}
        self._triage: dict[str, dict] = {}
        self._drafts: dict[str, dict] = {}
        self._charts: dict[str, list] = {}
        self._sessions: dict[str, dict] = {}
        self._notes: dict[str, dict] = {}
        self._audit: list[AuditEvent] = []
        self._load()

    # -- loading -----------------------------------------------------------

    def _load(self) -> None:
        if self._audit_path.exists():
            with open(self._audit_path, encoding="utf-8") as fh:
                self._audit = [AuditEvent.from_line(ln) for ln in fh if ln.strip()]
        ingest_order = [
            ev.case_id for ev in self._audit if ev.action is AuditAction.INGESTED
        ]
        on_disk = {}
        for path in sorted((self.root / "cases").glob("*.json")):
            case = bundle.parse_case_bundle(path.read_bytes())
            on_disk[case.case_id] = case
        for case_id in ingest_order:
            if case_id in on_disk:
                self._cases[case_id] = on_disk.pop(case_id)
        for case_id, case in on_disk.items():  # files without audit trail, if any
            self._cases[case_id] = case
        for name, cache in (
            ("triage", self._triage),
            ("drafts", self._drafts),
            ("charts", self._charts),
            ("sessions", self._sessions),
            ("notes", self._notes),
        ):
            for path in (self.root / name).glob("*.json"):
                doc = json.loads(path.read_text(encoding="utf-8"))
                cache[unquote(path.stem)] = doc

    # -- locks and audit ----------------------------------------------------

    def case_lock(self, case_id: str) -> threading.RLock:
        """Per-case write lock (single-writer-per-case contract)."""
        with self._locks_guard:
            lock = self._case_locks.get(case_id)
            if lock is None:
                lock = self._case_locks[case_id] = threading.RLock()
            return lock

    def append_audit(
        self, actor: str, action: AuditAction, case_id: str, payload_digest: str
    ) -> AuditEvent:
        if "|" in actor:
            raise ValueError("actor must not contain '|'")
        if action in PHYSICIAN_ONLY_ACTIONS and actor == SYSTEM_ACTOR:
            raise ValueError(f"{action.value} events require a physician actor")
        with self._audit_lock:
            event = AuditEvent(
                seq=len(self._audit) + 1,
                timestamp=datetime.utcnow().replace(microsecond=0),
                actor=actor,
                action=action,
                case_id=case_id,
                payload_digest=payload_digest,
            )
            with open(self._audit_path, "a", encoding="utf-8") as fh:
                fh.write(event.to_line() + "\n")
            self._audit.append(event)
            return event

    def audit_events(self) -> list[AuditEvent]:
        with self._audit_lock:
            return list(self._audit)

    # -- filesystem helpers --------------------------------------------------

    def _artifact_path(self, kind: str, case_id: str, suffix: str = ".json") -> Path:
        return self.root / kind / (quote(case_id, safe="") + suffix)

    def _write_doc(self, kind: str, case_id: str, doc) -> str:
        payload = (json.dumps(doc, indent=2) + "\n").encode("utf-8")
        self._artifact_path(kind, case_id).write_bytes(payload)
        return digest_bytes(payload)

    # -- cases ---------------------------------------------------------------

    def put_case(self, case: PatientCase) -> AuditEvent:
        with self.case_lock(case.case_id):
            if case.case_id in self._cases:
                raise DuplicateCase(case.case_id)
            payload = bundle.serialize_case_bundle(case)
            self._artifact_path("cases", case.case_id).write_bytes(payload)
            self._cases[case.case_id] = case
            return self.append_audit(
                SYSTEM_ACTOR, AuditAction.INGESTED, case.case_id, digest_bytes(payload)
            )

    def get_case(self, case_id: str) -> PatientCase:
        try:
            return self._cases[case_id]
        except KeyError:
            raise UnknownCase(case_id) from None

    def case_ids(self) -> list[str]:
        return list(self._cases)

    def list_queue(self) -> list[QueueEntry]:
        """Queue entries in ingestion order. Labels change with re-triage;
        order never does (review order stays at physician discretion)."""
        entries = []
        for case_id in self._cases:
            triage_doc = self._triage.get(case_id)
            label = UrgencyLabel(triage_doc["label"]) if triage_doc else None
            session = self._sessions.get(case_id)
            if case_id in self._notes:
                status = "approved"
            elif session is not None:
                status = session["status"]
            elif case_id in self._drafts:
                status = "drafted"
            elif triage_doc is not None:
                status = "triaged"
            else:
                status = "ingested"
            entries.append(QueueEntry(case_id=case_id, label=label, status=status))
        return entries

    # -- triage ----------------------------------------------------------------

    def put_triage(self, case_id: str, doc: dict) -> AuditEvent:
        with self.case_lock(case_id):
            if case_id not in self._cases:
                raise UnknownCase(case_id)
            doc = dict(doc, case_id=case_id)
            digest = self._write_doc("triage", case_id, doc)
            self._triage[case_id] = doc
            return self.append_audit(
                SYSTEM_ACTOR, AuditAction.TRIAGED, case_id, digest
            )

    def get_triage(self, case_id: str) -> dict:
        if case_id not in self._cases:
            raise UnknownCase(case_id)
        try:
            return self._triage[case_id]
        except KeyError:
            raise MissingTriage(case_id) from None

    def has_triage(self, case_id: str) -> bool:
        return case_id in self._triage

    # -- drafts and charts -------------------------------------------------------

    def put_draft(self, case_id: str, draft_doc: dict, charts_doc: list) -> AuditEvent:
        with self.case_lock(case_id):
            if case_id not in self._cases:
                raise UnknownCase(case_id)
            if case_id not in self._triage:
                raise MissingTriage(case_id)
            draft_doc = dict(draft_doc, case_id=case_id)
            digest = self._write_doc("drafts", case_id, draft_doc)
            self._write_doc("charts", case_id, charts_doc)
            self._drafts[case_id] = draft_doc
            self._charts[case_id] = charts_doc
            return self.append_audit(
                SYSTEM_ACTOR, AuditAction.DRAFTED, case_id, digest
            )

    def get_draft(self, case_id: str) -> dict:
        if case_id not in self._cases:
            raise UnknownCase(case_id)
        try:
            return self._drafts[case_id]
        except KeyError:
            raise MissingDraft(case_id) from None

    def get_charts(self, case_id: str) -> list:
        if case_id not in self._cases:
            raise UnknownCase(case_id)
        return self._charts.get(case_id, [])

    def has_draft(self, case_id: str) -> bool:
        return case_id in self._drafts

    # -- sessions, notes, exports ---------------------------------------------

    def save_session(self, case_id: str, doc: dict) -> str:
        with self.case_lock(case_id):
            doc = dict(doc, case_id=case_id)
            digest = self._write_doc("sessions", case_id, doc)
            self._sessions[case_id] = doc
            return digest

    def get_session(self, case_id: str) -> dict:
        if case_id not in self._cases:
            raise UnknownCase(case_id)
        try:
            return self._sessions[case_id]
        except KeyError:
            raise MissingSession(case_id) from None

    def has_session(self, case_id: str) -> bool:
        return case_id in self._sessions

    def put_note(self, case_id: str, doc: dict) -> str:
        with self.case_lock(case_id):
            session = self._sessions.get(case_id)
            if session is None or session.get("status") != "approved":
                raise MissingSession(
                    f"approved session required before storing a note for {case_id}"
                )
            doc = dict(doc, case_id=case_id)
            digest = self._write_doc("notes", case_id, doc)
            self._notes[case_id] = doc
            return digest

    def get_note(self, case_id: str) -> dict:
        if case_id not in self._cases:
            raise UnknownCase(case_id)
        try:
            return self._notes[case_id]
        except KeyError:
            raise MissingSession(f"no approved note for {case_id}") from None

    def write_export(self, case_id: str, html: bytes) -> str:
        path = self._artifact_path("exports", case_id, suffix=".html")
        path.write_bytes(html)
        return digest_bytes(html)

    def read_export(self, case_id: str) -> bytes:
        path = self._artifact_path("exports", case_id, suffix=".html")
        if not path.exists():
            raise MissingSession(f"no export for {case_id}")
        return path.read_bytes()
