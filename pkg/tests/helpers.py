"""Shared test utilities: random instance generators and comparison helpers."""

from __future__ import annotations

import random
from datetime import date, timedelta
from decimal import Decimal
from fractions import Fraction

from pmcontrols import Baseline, ProgressSnapshot
from pmcontrols.money import TimePoint

REL_TOL = 1e-9
ABS_TOL = 1e-12


def close(a, b, rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> bool:
    """Both-none or numerically close at the acceptance tolerance."""
    if a is None or b is None:
        return a is None and b is None
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= max(rel_tol * max(abs(fa), abs(fb)), abs_tol)


def rand_money(rng: random.Random, lo: float = 0, hi: float = 1_000_000) -> Decimal:
    """A 4-decimal-place amount in [lo, hi]."""
    return Decimal(rng.randint(int(lo * 10_000), int(hi * 10_000))) / 10_000


def rand_fraction(rng: random.Random) -> Decimal:
    """A 4-decimal-place fraction in [0, 1], with the endpoints over-sampled."""
    roll = rng.random()
    if roll < 0.1:
        return Decimal(0)
    if roll < 0.2:
        return Decimal(1)
    return Decimal(rng.randint(0, 10_000)) / 10_000


def random_baseline_doc(rng: random.Random, project_id: str = "P1") -> dict:
    """A valid random baseline document (numeric or date axis, 1..8 tasks)."""
    date_axis = rng.random() < 0.4
    epoch = date(2026, 1, 1)
    n_tasks = rng.randint(1, 8)
    tasks = []
    for i in range(n_tasks):
        budget = rand_money(rng, lo=1, hi=100_000)
        n_points = rng.randint(1, 6)
        if date_axis:
            offsets = sorted(rng.sample(range(0, 120), n_points))
            times = [(epoch + timedelta(days=o)).isoformat() for o in offsets]
        else:
            # Half-period ordinals exercise fractional interpolation spans.
            offsets = sorted(rng.sample(range(0, 240), n_points))
            times = [str(Decimal(o) / 2) for o in offsets]
        interior = sorted(rand_money(rng, lo=0, hi=float(budget)) for _ in range(n_points - 1))
        cumulative = [str(v) for v in interior] + [str(budget)]
        tasks.append(
            {
                "task_id": f"T{i:02d}",
                "budget": str(budget),
                "curve": [{"t": t, "cumulative": c} for t, c in zip(times, cumulative)],
            }
        )
    return {"project_id": project_id, "tasks": tasks}


def random_snapshot_doc(rng: random.Random, baseline_doc: dict) -> dict:
    """A valid random snapshot for ``baseline_doc`` (tasks may be absent)."""
    times = [
        point["t"] for task in baseline_doc["tasks"] for point in task["curve"]
    ]
    sample_points = sorted(times, key=lambda t: TimePoint.parse(t).ordinal())
    first = TimePoint.parse(sample_points[0])
    last = TimePoint.parse(sample_points[-1])
    span = float(last.ordinal() - first.ordinal()) or 1.0
    offset = rng.uniform(-0.2 * span - 1, 1.2 * span + 1)
    if first.is_date:
        status = (first.value + timedelta(days=int(offset))).isoformat()
    else:
        status = str(Decimal(int((float(first.ordinal()) + offset) * 2)) / 2)
    entries = []
    for task in baseline_doc["tasks"]:
        if rng.random() < 0.2:
            continue  # absent: counts as 0% complete
        budget = Decimal(task["budget"])
        entries.append(
            {
                "task_id": task["task_id"],
                "percent_complete": str(rand_fraction(rng)),
                "actual_cost": str(rand_money(rng, lo=0, hi=float(budget) * 1.5)),
            }
        )
    return {"project_id": baseline_doc["project_id"], "status_date": status, "entries": entries}


def random_instance(rng: random.Random) -> tuple[Baseline, ProgressSnapshot, dict, dict]:
    baseline_doc = random_baseline_doc(rng)
    snapshot_doc = random_snapshot_doc(rng, baseline_doc)
    return (
        Baseline.from_doc(baseline_doc),
        ProgressSnapshot.from_doc(snapshot_doc),
        baseline_doc,
        snapshot_doc,
    )


def to_fraction(raw) -> Fraction:
    """Exact rational value of a decimal string/number."""
    return Fraction(Decimal(str(raw)))


# ── state machine oracle ─────────────────────────────────────────────
#
# The declared transition table, written flat for exhaustive checking:
# (phase, event kind, outcome, win/loss-go already recorded) -> next phase.
# Any (phase, event) combination absent from this table must error.

from pmcontrols import EventKind, Outcome, ProjectPhase  # noqa: E402

GO, NO_GO, NONE = Outcome.GO, Outcome.NO_GO, None

DECLARED_TRANSITIONS = {
    (ProjectPhase.OPPORTUNITY, EventKind.OPPORTUNITY_QUALIFIED, NONE, False):
        ProjectPhase.PROPOSAL_PREPARATION,
    (ProjectPhase.PROPOSAL_PREPARATION, EventKind.DECISION_BID_NO_BID, GO, False):
        ProjectPhase.NEGOTIATION,
    (ProjectPhase.PROPOSAL_PREPARATION, EventKind.DECISION_BID_NO_BID, NO_GO, False):
        ProjectPhase.ABANDONED,
    (ProjectPhase.NEGOTIATION, EventKind.DECISION_WIN_LOSS, GO, False):
        ProjectPhase.NEGOTIATION,
    (ProjectPhase.NEGOTIATION, EventKind.DECISION_WIN_LOSS, NO_GO, False):
        ProjectPhase.ABANDONED,
    (ProjectPhase.NEGOTIATION, EventKind.CONTRACT_SIGNED, NONE, True):
        ProjectPhase.IMPLEMENTATION,
    (ProjectPhase.IMPLEMENTATION, EventKind.PLAN_ESTABLISHED, NONE, True):
        ProjectPhase.IMPLEMENTATION,
    (ProjectPhase.IMPLEMENTATION, EventKind.TASKS_COMPLETED, NONE, True):
        ProjectPhase.IMPLEMENTATION,
    (ProjectPhase.IMPLEMENTATION, EventKind.TESTS_PASSED, NONE, True):
        ProjectPhase.IMPLEMENTATION,
    (ProjectPhase.IMPLEMENTATION, EventKind.DELIVERED_TO_CUSTOMER, NONE, True):
        ProjectPhase.DELIVERED,
    (ProjectPhase.DELIVERED, EventKind.CONTRACT_CLOSED, NONE, True):
        ProjectPhase.CLOSED,
}


def record_in_phase(phase: ProjectPhase, with_win_go: bool = False):
    """A real record driven to ``phase`` through the legal event sequence."""
    from pmcontrols import LifecycleEvent, advance
    from pmcontrols.lifecycle import new_record
    from pmcontrols.money import TimePoint

    def ev(kind, outcome=None, role="business_manager"):
        return LifecycleEvent(
            kind=kind, role=role, at=TimePoint.parse(0), outcome=outcome
        )

    record = new_record("P1")
    if phase is ProjectPhase.OPPORTUNITY:
        return record
    record = advance(record, ev(EventKind.OPPORTUNITY_QUALIFIED, role="business_engineer"))
    if phase is ProjectPhase.PROPOSAL_PREPARATION:
        return record
    if phase is ProjectPhase.ABANDONED and not with_win_go:
        return advance(record, ev(EventKind.DECISION_BID_NO_BID, Outcome.NO_GO))
    record = advance(record, ev(EventKind.DECISION_BID_NO_BID, Outcome.GO))
    if phase is ProjectPhase.NEGOTIATION and not with_win_go:
        return record
    record = advance(record, ev(EventKind.DECISION_WIN_LOSS, Outcome.GO))
    if phase is ProjectPhase.NEGOTIATION:
        return record
    record = advance(record, ev(EventKind.CONTRACT_SIGNED, role="legal_support"))
    if phase is ProjectPhase.IMPLEMENTATION:
        return record
    record = advance(record, ev(EventKind.DELIVERED_TO_CUSTOMER, role="project_manager"))
    if phase is ProjectPhase.DELIVERED:
        return record
    record = advance(record, ev(EventKind.CONTRACT_CLOSED, role="legal_support"))
    if phase is ProjectPhase.CLOSED:
        return record
    raise AssertionError(f"no path to {phase} with with_win_go={with_win_go}")
