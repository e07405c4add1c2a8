"""Earned-value project controls.

An analysis engine for planned/earned/actual cost indicators, a diagnostics
layer that grades performance and recommends forecasts and corrective
actions, a gated project lifecycle state machine, durable storage with a
per-project event feed, an HTTP service and an operator CLI.
"""

from .diagnostics import (
    CorrectiveAction,
    CycleStep,
    DiagnosticReport,
    PerformanceQuadrant,
    Severity,
    Thresholds,
    classify,
    evaluate_cycle,
    forecast_time,
    select_eac_variant,
)
from .errors import PmControlsError
from .evm import (
    Baseline,
    EacVariant,
    EvmMetrics,
    ProgressSnapshot,
    TaskPlan,
    TaskProgress,
    TimePhasedBudget,
    compute_ac,
    compute_ev,
    compute_metrics,
    compute_pv,
    cost_variance,
    cpi,
    eac,
    etc,
    schedule_variance,
    spi,
    vac,
)
from .lifecycle import (
    EventKind,
    Gate,
    GateDecision,
    LifecycleEvent,
    Outcome,
    ProjectPhase,
    ProjectRecord,
    advance,
    allowed_events,
)
from .money import TimePoint, format_money, parse_money
from .storage import FeedEvent, FeedEventKind, ProjectStore, StoredProject

__version__ = "0.1.0"

__all__ = [
    "Baseline",
    "CorrectiveAction",
    "CycleStep",
    "DiagnosticReport",
    "EacVariant",
    "EventKind",
    "EvmMetrics",
    "FeedEvent",
    "FeedEventKind",
    "Gate",
    "GateDecision",
    "LifecycleEvent",
    "Outcome",
    "PerformanceQuadrant",
    "PmControlsError",
    "ProgressSnapshot",
    "ProjectPhase",
    "ProjectRecord",
    "ProjectStore",
    "Severity",
    "StoredProject",
    "TaskPlan",
    "TaskProgress",
    "Thresholds",
    "TimePhasedBudget",
    "TimePoint",
    "advance",
    "allowed_events",
    "classify",
    "compute_ac",
    "compute_ev",
    "compute_metrics",
    "compute_pv",
    "cost_variance",
    "cpi",
    "eac",
    "etc",
    "evaluate_cycle",
    "forecast_time",
    "format_money",
    "parse_money",
    "schedule_variance",
    "select_eac_variant",
    "spi",
    "vac",
]
