"""A deterministic sample project: ten tasks, twelve progress snapshots.

Used by the CLI ``demo`` command, the test suite and the dashboard fixtures.
Progress is generated to lag the plan while spending runs hot, so the
project reads over budget and behind schedule by mid-life.
"""

from __future__ import annotations

from decimal import Decimal, localcontext

from .lifecycle import LifecycleEvent
from .money import DECIMAL_CONTEXT
from .storage import ProjectStore, StoredProject
from .evm import Baseline, ProgressSnapshot

DEMO_PROJECT_ID = "DESK-1"

_QUANTUM = Decimal("0.0001")

# (task_id, budget, start period, duration, curve shape)
_TASKS = (
    ("T01", Decimal("800"), 0, 8, "linear"),
    ("T02", Decimal("1200"), 1, 10, "front"),
    ("T03", Decimal("1500"), 2, 12, "linear"),
    ("T04", Decimal("500"), 3, 6, "back"),
    ("T05", Decimal("2000"), 4, 14, "front"),
    ("T06", Decimal("950"), 5, 9, "linear"),
    ("T07", Decimal("1100"), 6, 7, "back"),
    ("T08", Decimal("600"), 7, 5, "linear"),
    ("T09", Decimal("1300"), 8, 11, "front"),
    ("T10", Decimal("1050"), 9, 10, "linear"),
)

SNAPSHOT_PERIODS = tuple(range(1, 13))

# How observed progress relates to planned progress, and spend to value.
_PROGRESS_LAG = Decimal("0.85")
_SPEND_OVERRUN = Decimal("1.15")


def _curve(budget: Decimal, start: int, duration: int, shape: str) -> list[dict]:
    finish = start + duration
    mid = start + duration // 2
    with localcontext(DECIMAL_CONTEXT):
        if shape == "front":  # most value accrues early
            mid_value = (budget * Decimal("0.65")).quantize(_QUANTUM)
        elif shape == "back":  # most value accrues late
            mid_value = (budget * Decimal("0.35")).quantize(_QUANTUM)
        else:
            return [
                {"t": start, "cumulative": "0.0000"},
                {"t": finish, "cumulative": str(budget.quantize(_QUANTUM))},
            ]
        return [
            {"t": start, "cumulative": "0.0000"},
            {"t": mid, "cumulative": str(mid_value)},
            {"t": finish, "cumulative": str(budget.quantize(_QUANTUM))},
        ]


def sample_baseline_doc(project_id: str = DEMO_PROJECT_ID) -> dict:
    return {
        "project_id": project_id,
        "tasks": [
            {
                "task_id": task_id,
                "budget": str(budget.quantize(_QUANTUM)),
                "curve": _curve(budget, start, duration, shape),
            }
            for task_id, budget, start, duration, shape in _TASKS
        ],
    }


def _planned_fraction(period: int, start: int, duration: int) -> Decimal:
    if period <= start:
        return Decimal(0)
    if period >= start + duration:
        return Decimal(1)
    with localcontext(DECIMAL_CONTEXT):
        return Decimal(period - start) / Decimal(duration)


def sample_snapshot_docs(project_id: str = DEMO_PROJECT_ID) -> list[dict]:
    docs = []
    for period in SNAPSHOT_PERIODS:
        entries = []
        for task_id, budget, start, duration, _shape in _TASKS:
            planned = _planned_fraction(period, start, duration)
            with localcontext(DECIMAL_CONTEXT):
                percent = min(Decimal(1), (planned * _PROGRESS_LAG)).quantize(_QUANTUM)
                actual = (budget * percent * _SPEND_OVERRUN).quantize(_QUANTUM)
            if percent == 0 and actual == 0:
                continue  # task not started: absent entries count as 0%
            entries.append(
                {
                    "task_id": task_id,
                    "percent_complete": str(percent),
                    "actual_cost": str(actual),
                }
            )
        docs.append({"project_id": project_id, "status_date": period, "entries": entries})
    return docs


def sample_lifecycle_event_docs() -> list[dict]:
    """The shortest legal path from first contact to implementation."""
    return [
        {"kind": "opportunity_qualified", "role": "business_engineer", "at": 0},
        {"kind": "decision_bid_no_bid", "role": "business_manager", "at": 0, "outcome": "go"},
        {"kind": "decision_win_loss", "role": "business_manager", "at": 0, "outcome": "go"},
        {"kind": "contract_signed", "role": "legal_support", "at": 0},
        {"kind": "plan_established", "role": "project_manager", "at": 0},
    ]


def seed_project(store: ProjectStore, project_id: str = DEMO_PROJECT_ID) -> StoredProject:
    """Create and fully populate the sample project in ``store``."""
    store.create_project(project_id)
    for event_doc in sample_lifecycle_event_docs():
        store.apply_event(project_id, LifecycleEvent.from_doc(event_doc))
    store.set_baseline(project_id, Baseline.from_doc(sample_baseline_doc(project_id)))
    for snapshot_doc in sample_snapshot_docs(project_id):
        store.record_snapshot(project_id, ProgressSnapshot.from_doc(snapshot_doc))
    return store.get(project_id)
