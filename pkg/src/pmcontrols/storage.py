"""Durable project storage with a per-project feed of committed writes.

Each project lives in its own directory as two canonical text documents:

    state.json   current-state document (the whole record plus revision)
    log.ndjson   append-only feed of committed write events, one per line

Commit protocol: the feed line is appended and flushed first, then the
state document is atomically replaced.  On load, feed lines beyond the
state's ``last_seq`` belong to writes that never committed and are dropped,
so a crash mid-write always recovers to the last committed revision.

Concurrency: writes to a project are serialized by a per-project lock;
reads never take it (the current state is swapped in as one reference).
Feed subscribers see events strictly after commit, in commit order.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

from .errors import (
    AlreadyExists,
    ConflictingRevision,
    UnknownProject,
    ValidationFailed,
)
from .evm import Baseline, ProgressSnapshot
from .money import format_money
from .lifecycle import (
    DECISION_KINDS,
    LifecycleEvent,
    ProjectPhase,
    ProjectRecord,
    advance,
    progress_warnings,
    with_baseline,
    with_snapshot,
)

_PROJECT_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")


def canonical_json(doc) -> str:
    """Stable, compact rendering used for every persisted document."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class FeedEventKind(str, Enum):
    SNAPSHOT_RECORDED = "snapshot_recorded"
    PHASE_CHANGED = "phase_changed"
    BASELINE_SET = "baseline_set"
    DECISION_RECORDED = "decision_recorded"


@dataclass(frozen=True)
class FeedEvent:
    """One committed write, as seen by feed subscribers."""

    seq: int
    project_id: str
    kind: FeedEventKind
    payload: dict
    revision: int

    def to_doc(self) -> dict:
        return {
            "seq": self.seq,
            "project_id": self.project_id,
            "kind": self.kind.value,
            "payload": self.payload,
            "revision": self.revision,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "FeedEvent":
        return cls(
            seq=int(doc["seq"]),
            project_id=doc["project_id"],
            kind=FeedEventKind(doc["kind"]),
            payload=doc["payload"],
            revision=int(doc["revision"]),
        )


@dataclass(frozen=True)
class StoredProject:
    """A project record plus its storage bookkeeping."""

    record: ProjectRecord
    revision: int
    last_seq: int

    def to_doc(self) -> dict:
        record = self.record
        return {
            "project_id": record.project_id,
            "revision": self.revision,
            "last_seq": self.last_seq,
            "phase": record.phase.value,
            "history": [event.to_doc() for event in record.history],
            "baseline": record.baseline.to_doc() if record.baseline else None,
            "archived_baselines": [b.to_doc() for b in record.archived_baselines],
            "snapshots": [s.to_doc() for s in record.snapshots],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "StoredProject":
        record = ProjectRecord(
            project_id=doc["project_id"],
            phase=ProjectPhase(doc["phase"]),
            history=tuple(LifecycleEvent.from_doc(e) for e in doc["history"]),
            baseline=Baseline.from_doc(doc["baseline"]) if doc.get("baseline") else None,
            snapshots=tuple(ProgressSnapshot.from_doc(s) for s in doc["snapshots"]),
            archived_baselines=tuple(Baseline.from_doc(b) for b in doc.get("archived_baselines", [])),
        )
        return cls(record=record, revision=int(doc["revision"]), last_seq=int(doc["last_seq"]))


class _Slot:
    """In-memory handle for one project: state ref, committed events, locks."""

    def __init__(self, stored: StoredProject, events: list[FeedEvent]):
        self.stored = stored
        self.events = events
        self.write_lock = threading.RLock()
        self.condition = threading.Condition()


def _fsync_file(handle) -> None:
    handle.flush()
    os.fsync(handle.fileno())


def _fsync_dir(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
    except OSError:  # pragma: no cover - platform-dependent
        return
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class ProjectStore:
    """All project state under one data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.projects_dir = self.data_dir / "projects"
        self.projects_dir.mkdir(parents=True, exist_ok=True)
        self._registry_lock = threading.RLock()
        self._slots: dict[str, _Slot] = {}
        self._load_all()

    # ── loading ──────────────────────────────────────────────────────

    def _load_all(self) -> None:
        for state_path in sorted(self.projects_dir.glob("*/state.json")):
            project_dir = state_path.parent
            stored = StoredProject.from_doc(json.loads(state_path.read_text(encoding="utf-8")))
            events = self._load_log(project_dir, stored.last_seq)
            self._slots[stored.record.project_id] = _Slot(stored, events)

    def _load_log(self, project_dir: Path, last_seq: int) -> list[FeedEvent]:
        log_path = project_dir / "log.ndjson"
        if not log_path.exists():
            return []
        events: list[FeedEvent] = []
        dropped = False
        for line in log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = FeedEvent.from_doc(json.loads(line))
            if event.seq > last_seq:
                # A write that appended its feed line but never committed
                # its state; drop it so replay matches committed history.
                dropped = True
                continue
            events.append(event)
        if dropped:
            with open(log_path, "w", encoding="utf-8") as handle:
                for event in events:
                    handle.write(canonical_json(event.to_doc()) + "\n")
                _fsync_file(handle)
        return events

    # ── path helpers ─────────────────────────────────────────────────

    def _project_dir(self, project_id: str) -> Path:
        return self.projects_dir / project_id

    def _write_state(self, project_dir: Path, stored: StoredProject) -> None:
        tmp_path = project_dir / "state.json.tmp"
        state_path = project_dir / "state.json"
        with open(tmp_path, "w", encoding="utf-8") as handle:
            handle.write(canonical_json(stored.to_doc()) + "\n")
            _fsync_file(handle)
        os.replace(tmp_path, state_path)
        _fsync_dir(project_dir)

    def _append_log(self, project_dir: Path, event: FeedEvent) -> None:
        with open(project_dir / "log.ndjson", "a", encoding="utf-8") as handle:
            handle.write(canonical_json(event.to_doc()) + "\n")
            _fsync_file(handle)

    # ── registry ─────────────────────────────────────────────────────

    def _slot(self, project_id: str) -> _Slot:
        with self._registry_lock:
            slot = self._slots.get(project_id)
        if slot is None:
            raise UnknownProject(f"no project {project_id!r}")
        return slot

    def create_project(self, project_id: str) -> StoredProject:
        if not isinstance(project_id, str) or not _PROJECT_ID.match(project_id):
            raise ValidationFailed(
                "project_id must be 1-64 chars of letters, digits, '.', '_' or '-'",
                pointer="project_id",
            )
        with self._registry_lock:
            if project_id in self._slots:
                raise AlreadyExists(f"project {project_id!r} already exists")
            project_dir = self._project_dir(project_id)
            if project_dir.exists():
                # Leftover from an interrupted create; it never committed.
                shutil.rmtree(project_dir)
            project_dir.mkdir(parents=True)
            stored = StoredProject(
                record=ProjectRecord(project_id=project_id), revision=1, last_seq=0
            )
            self._write_state(project_dir, stored)
            self._slots[project_id] = _Slot(stored, [])
            return stored

    def get(self, project_id: str) -> StoredProject:
        return self._slot(project_id).stored

    def list_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._slots)

    def delete_project(self, project_id: str) -> None:
        with self._registry_lock:
            slot = self._slots.get(project_id)
            if slot is None:
                raise UnknownProject(f"no project {project_id!r}")
            with slot.write_lock:
                shutil.rmtree(self._project_dir(project_id), ignore_errors=True)
                del self._slots[project_id]
            with slot.condition:
                slot.condition.notify_all()

    # ── commits ──────────────────────────────────────────────────────

    def _commit(
        self,
        project_id: str,
        expected_revision: Optional[int],
        transform: Callable[[ProjectRecord], ProjectRecord],
        kind: FeedEventKind,
        payload: Callable[[ProjectRecord, ProjectRecord], dict],
    ) -> tuple[StoredProject, FeedEvent]:
        slot = self._slot(project_id)
        with slot.write_lock:
            stored = slot.stored
            if expected_revision is not None and expected_revision != stored.revision:
                raise ConflictingRevision(
                    f"write was based on revision {expected_revision}, "
                    f"current revision is {stored.revision}"
                )
            new_record = transform(stored.record)
            event = FeedEvent(
                seq=stored.last_seq + 1,
                project_id=project_id,
                kind=kind,
                payload=payload(stored.record, new_record),
                revision=stored.revision + 1,
            )
            project_dir = self._project_dir(project_id)
            self._append_log(project_dir, event)
            new_stored = StoredProject(
                record=new_record, revision=stored.revision + 1, last_seq=event.seq
            )
            self._write_state(project_dir, new_stored)
            with slot.condition:
                slot.stored = new_stored
                slot.events.append(event)
                slot.condition.notify_all()
            return new_stored, event

    def set_baseline(
        self,
        project_id: str,
        baseline: Baseline,
        rebaseline: bool = False,
        expected_revision: Optional[int] = None,
    ) -> tuple[StoredProject, FeedEvent]:
        if baseline.project_id != project_id:
            raise ValidationFailed(
                f"baseline document is for project {baseline.project_id!r}", pointer="project_id"
            )
        return self._commit(
            project_id,
            expected_revision,
            lambda record: with_baseline(record, baseline, rebaseline=rebaseline),
            FeedEventKind.BASELINE_SET,
            lambda old, new: {
                "bac": format_money(baseline.bac),
                "task_count": len(baseline.tasks),
                "rebaseline": rebaseline,
            },
        )

    def record_snapshot(
        self,
        project_id: str,
        snapshot: ProgressSnapshot,
        expected_revision: Optional[int] = None,
    ) -> tuple[StoredProject, FeedEvent, list[str]]:
        if snapshot.project_id != project_id:
            raise ValidationFailed(
                f"snapshot document is for project {snapshot.project_id!r}", pointer="project_id"
            )
        slot = self._slot(project_id)
        with slot.write_lock:
            warnings = progress_warnings(slot.stored.record, snapshot)
            stored, event = self._commit(
                project_id,
                expected_revision,
                lambda record: with_snapshot(record, snapshot),
                FeedEventKind.SNAPSHOT_RECORDED,
                lambda old, new: {
                    "status_date": snapshot.status_date.canonical(),
                    "entry_count": len(snapshot.entries),
                },
            )
        return stored, event, warnings

    def apply_event(
        self,
        project_id: str,
        event: LifecycleEvent,
        expected_revision: Optional[int] = None,
    ) -> tuple[StoredProject, FeedEvent]:
        if event.kind in DECISION_KINDS:
            kind = FeedEventKind.DECISION_RECORDED
            payload = lambda old, new: {
                "gate": event.gate.value,
                "outcome": event.outcome.value,
                "role": event.role,
                "from": old.phase.value,
                "to": new.phase.value,
            }
        else:
            kind = FeedEventKind.PHASE_CHANGED
            payload = lambda old, new: {
                "event": event.kind.value,
                "role": event.role,
                "from": old.phase.value,
                "to": new.phase.value,
            }
        return self._commit(
            project_id,
            expected_revision,
            lambda record: advance(record, event),
            kind,
            payload,
        )

    # ── feed ─────────────────────────────────────────────────────────

    def events_since(self, project_id: str, from_seq: int = 0) -> list[FeedEvent]:
        """All committed events with sequence number greater than ``from_seq``."""
        if from_seq < 0:
            raise ValidationFailed("from_seq must be >= 0", pointer="from_seq")
        slot = self._slot(project_id)
        with slot.condition:
            return [event for event in slot.events if event.seq > from_seq]

    def wait_for_events(
        self, project_id: str, from_seq: int, timeout: float
    ) -> list[FeedEvent]:
        """``events_since`` that blocks up to ``timeout`` seconds for news."""
        deadline = time.monotonic() + timeout
        while True:
            events = self.events_since(project_id, from_seq)
            if events:
                return events
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return []
            slot = self._slot(project_id)
            with slot.condition:
                if not any(e.seq > from_seq for e in slot.events):
                    slot.condition.wait(remaining)
