"""Project lifecycle state machine.

Phases run from first customer contact through proposal, negotiation and
implementation to contract close-out, with two management decision gates:
bid/no-bid validates the proposal, win/loss commits to the deal.  A no-go at
either gate abandons the project.  Records are immutable; ``advance``
returns a new record with the event appended.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import (
    IllegalTransition,
    NoBaseline,
    PhaseViolation,
    TerminalState,
    ValidationFailed,
)
from .evm import Baseline, ProgressSnapshot, validate_snapshot_against
from .money import TimePoint


class ProjectPhase(str, Enum):
    OPPORTUNITY = "opportunity"
    PROPOSAL_PREPARATION = "proposal_preparation"
    NEGOTIATION = "negotiation"
    IMPLEMENTATION = "implementation"
    DELIVERED = "delivered"
    CLOSED = "closed"
    ABANDONED = "abandoned"


TERMINAL_PHASES = frozenset({ProjectPhase.CLOSED, ProjectPhase.ABANDONED})


class EventKind(str, Enum):
    OPPORTUNITY_QUALIFIED = "opportunity_qualified"
    PROPOSAL_READY = "proposal_ready"
    DECISION_BID_NO_BID = "decision_bid_no_bid"
    DECISION_WIN_LOSS = "decision_win_loss"
    CONTRACT_SIGNED = "contract_signed"
    PLAN_ESTABLISHED = "plan_established"
    TASKS_COMPLETED = "tasks_completed"
    TESTS_PASSED = "tests_passed"
    DELIVERED_TO_CUSTOMER = "delivered_to_customer"
    CONTRACT_CLOSED = "contract_closed"


DECISION_KINDS = frozenset({EventKind.DECISION_BID_NO_BID, EventKind.DECISION_WIN_LOSS})


class Gate(str, Enum):
    BID_NO_BID = "bid_no_bid"
    WIN_LOSS = "win_loss"


class Outcome(str, Enum):
    GO = "go"
    NO_GO = "no_go"


ROLES = (
    "business_engineer",
    "before_sale_engineer",
    "business_manager",
    "legal_support",
    "architect",
    "project_manager",
    "team_member",
    "customer",
)


@dataclass(frozen=True)
class LifecycleEvent:
    """One lifecycle occurrence: what happened, who recorded it, and when.

    ``outcome`` is required for the two decision kinds and must be absent
    otherwise.
    """

    kind: EventKind
    role: str
    at: TimePoint
    outcome: Optional[Outcome] = None

    def __post_init__(self):
        if not self.role:
            raise ValidationFailed("role must be non-empty", pointer="role")
        if self.kind in DECISION_KINDS:
            if self.outcome is None:
                raise ValidationFailed(
                    f"{self.kind.value} requires an outcome (go/no_go)", pointer="outcome"
                )
        elif self.outcome is not None:
            raise ValidationFailed(
                f"{self.kind.value} does not take an outcome", pointer="outcome"
            )

    @property
    def gate(self) -> Optional[Gate]:
        if self.kind is EventKind.DECISION_BID_NO_BID:
            return Gate.BID_NO_BID
        if self.kind is EventKind.DECISION_WIN_LOSS:
            return Gate.WIN_LOSS
        return None

    @classmethod
    def from_doc(cls, doc, default_role: Optional[str] = None) -> "LifecycleEvent":
        """Parse ``{kind, at, role?, outcome?}``; ``default_role`` fills a missing role."""
        if not isinstance(doc, dict):
            raise ValidationFailed("event document must be an object")
        try:
            kind = EventKind(doc.get("kind"))
        except ValueError:
            raise ValidationFailed(f"unknown event kind {doc.get('kind')!r}", pointer="kind")
        role = doc.get("role", default_role)
        if not isinstance(role, str) or not role:
            raise ValidationFailed("must be a non-empty string", pointer="role")
        at = TimePoint.parse(doc.get("at"), field="at")
        outcome = None
        if doc.get("outcome") is not None:
            try:
                outcome = Outcome(doc.get("outcome"))
            except ValueError:
                raise ValidationFailed(f"unknown outcome {doc.get('outcome')!r}", pointer="outcome")
        return cls(kind=kind, role=role, at=at, outcome=outcome)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind.value,
            "role": self.role,
            "at": self.at.canonical(),
            "outcome": self.outcome.value if self.outcome else None,
        }


@dataclass(frozen=True)
class GateDecision:
    """A decision-gate outcome extracted from the history."""

    gate: Gate
    outcome: Outcome
    decided_by: str
    decided_at: TimePoint


@dataclass(frozen=True)
class ProjectRecord:
    """The persisted unit: phase, append-only history, plan and observations."""

    project_id: str
    phase: ProjectPhase = ProjectPhase.OPPORTUNITY
    history: tuple[LifecycleEvent, ...] = ()
    baseline: Optional[Baseline] = None
    snapshots: tuple[ProgressSnapshot, ...] = ()
    archived_baselines: tuple[Baseline, ...] = ()

    def __post_init__(self):
        if not self.project_id:
            raise ValidationFailed("project_id must be non-empty", pointer="project_id")

    def gate_decisions(self) -> tuple[GateDecision, ...]:
        return tuple(
            GateDecision(gate=e.gate, outcome=e.outcome, decided_by=e.role, decided_at=e.at)
            for e in self.history
            if e.gate is not None
        )

    def has_win_loss_go(self) -> bool:
        return any(
            e.kind is EventKind.DECISION_WIN_LOSS and e.outcome is Outcome.GO
            for e in self.history
        )


def new_record(project_id: str) -> ProjectRecord:
    return ProjectRecord(project_id=project_id)


def _target_phase(record: ProjectRecord, event: LifecycleEvent) -> ProjectPhase:
    """The declared transition table; raises for any pair outside it."""
    phase, kind = record.phase, event.kind

    if phase is ProjectPhase.OPPORTUNITY and kind is EventKind.OPPORTUNITY_QUALIFIED:
        return ProjectPhase.PROPOSAL_PREPARATION

    if phase is ProjectPhase.PROPOSAL_PREPARATION and kind is EventKind.DECISION_BID_NO_BID:
        return ProjectPhase.NEGOTIATION if event.outcome is Outcome.GO else ProjectPhase.ABANDONED

    if phase is ProjectPhase.NEGOTIATION:
        if kind is EventKind.DECISION_WIN_LOSS:
            if record.has_win_loss_go():
                raise IllegalTransition(phase, kind, "win/loss is already decided")
            return ProjectPhase.NEGOTIATION if event.outcome is Outcome.GO else ProjectPhase.ABANDONED
        if kind is EventKind.CONTRACT_SIGNED:
            if not record.has_win_loss_go():
                raise IllegalTransition(phase, kind, "requires a prior win decision")
            return ProjectPhase.IMPLEMENTATION

    if phase is ProjectPhase.IMPLEMENTATION:
        if kind in (
            EventKind.PLAN_ESTABLISHED,
            EventKind.TASKS_COMPLETED,
            EventKind.TESTS_PASSED,
        ):
            return ProjectPhase.IMPLEMENTATION
        if kind is EventKind.DELIVERED_TO_CUSTOMER:
            return ProjectPhase.DELIVERED

    if phase is ProjectPhase.DELIVERED and kind is EventKind.CONTRACT_CLOSED:
        return ProjectPhase.CLOSED

    raise IllegalTransition(phase, kind)


def advance(record: ProjectRecord, event: LifecycleEvent) -> ProjectRecord:
    """Apply one event; returns the updated record or raises.

    History is append-only and its timestamps must be non-decreasing.
    """
    if record.phase in TERMINAL_PHASES:
        raise TerminalState(f"project is {record.phase.value}; no further events are accepted")
    if record.history and event.at < record.history[-1].at:
        raise ValidationFailed(
            "event timestamp precedes the last recorded event", pointer="at"
        )
    target = _target_phase(record, event)
    return replace(record, phase=target, history=record.history + (event,))


def allowed_events(record: ProjectRecord) -> frozenset[EventKind]:
    """Exactly the event kinds ``advance`` would accept right now."""
    phase = record.phase
    if phase in TERMINAL_PHASES:
        return frozenset()
    if phase is ProjectPhase.OPPORTUNITY:
        return frozenset({EventKind.OPPORTUNITY_QUALIFIED})
    if phase is ProjectPhase.PROPOSAL_PREPARATION:
        return frozenset({EventKind.DECISION_BID_NO_BID})
    if phase is ProjectPhase.NEGOTIATION:
        if record.has_win_loss_go():
            return frozenset({EventKind.CONTRACT_SIGNED})
        return frozenset({EventKind.DECISION_WIN_LOSS})
    if phase is ProjectPhase.IMPLEMENTATION:
        return frozenset(
            {
                EventKind.PLAN_ESTABLISHED,
                EventKind.TASKS_COMPLETED,
                EventKind.TESTS_PASSED,
                EventKind.DELIVERED_TO_CUSTOMER,
            }
        )
    if phase is ProjectPhase.DELIVERED:
        return frozenset({EventKind.CONTRACT_CLOSED})
    return frozenset()  # pragma: no cover - all phases handled above


def with_baseline(
    record: ProjectRecord, baseline: Baseline, rebaseline: bool = False
) -> ProjectRecord:
    """Attach or replace the baseline.

    Once progress has been recorded the plan is locked; replacing it then
    requires the explicit ``rebaseline`` flag, which archives the old plan.
    Delivered and terminal projects no longer take plan changes.
    """
    if baseline.project_id != record.project_id:
        raise ValidationFailed(
            f"baseline is for project {baseline.project_id!r}, record is {record.project_id!r}"
        )
    if record.phase in TERMINAL_PHASES or record.phase is ProjectPhase.DELIVERED:
        raise PhaseViolation(f"cannot set a baseline in phase {record.phase.value}")
    if record.snapshots and not rebaseline:
        raise PhaseViolation(
            "baseline is locked after the first snapshot; pass rebaseline to replace it"
        )
    archived = record.archived_baselines
    if record.baseline is not None and rebaseline:
        archived = archived + (record.baseline,)
    return replace(record, baseline=baseline, archived_baselines=archived)


def with_snapshot(record: ProjectRecord, snapshot: ProgressSnapshot) -> ProjectRecord:
    """Append a progress snapshot.

    Snapshots are only recordable during implementation, require a baseline,
    must reference only baseline tasks, and must advance the status date.
    """
    if snapshot.project_id != record.project_id:
        raise ValidationFailed(
            f"snapshot is for project {snapshot.project_id!r}, record is {record.project_id!r}"
        )
    if record.phase is not ProjectPhase.IMPLEMENTATION:
        raise PhaseViolation(
            f"snapshots are only recordable during implementation (phase is {record.phase.value})"
        )
    if record.baseline is None:
        raise NoBaseline("a baseline must be set before recording progress")
    validate_snapshot_against(record.baseline, snapshot)
    if record.snapshots and not (record.snapshots[-1].status_date < snapshot.status_date):
        raise ValidationFailed(
            "status_date must be after the previous snapshot", pointer="status_date"
        )
    return replace(record, snapshots=record.snapshots + (snapshot,))


def progress_warnings(record: ProjectRecord, snapshot: ProgressSnapshot) -> list[str]:
    """Non-fatal oddities in a new snapshot relative to the previous one.

    Progress data is noisy; a task assessed lower than before is legal but
    worth flagging to the operator.
    """
    if not record.snapshots:
        return []
    previous = {e.task_id: e for e in record.snapshots[-1].entries}
    warnings = []
    for entry in snapshot.entries:
        before = previous.get(entry.task_id)
        if before is not None and entry.percent_complete < before.percent_complete:
            warnings.append(
                f"task {entry.task_id}: percent_complete decreased "
                f"({before.percent_complete} -> {entry.percent_complete})"
            )
    return warnings
