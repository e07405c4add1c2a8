"""Interprets computed indicators: performance quadrant, severity, forecast
variant recommendation, corrective-action suggestions and a completion-time
extrapolation.

This is the policy layer on top of the pure arithmetic in :mod:`.evm`: the
control cycle evaluates a snapshot against the baseline and either proceeds
to the next cycle or flags the project for investigation.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, replace
from decimal import Decimal
from enum import Enum
from typing import Optional, Sequence

from .errors import NoDefinedIndex, ValidationFailed
from .evm import Baseline, EacVariant, EvmMetrics, ProgressSnapshot, compute_metrics
from .money import TimePoint, money_div


class PerformanceQuadrant(str, Enum):
    """Sign of (CV, SV) mapped to a performance reading.

    A zero variance on one axis counts as favorable for quadrant purposes;
    :meth:`label` collapses the neutral axis out of the display text.
    """

    ON_TRACK = "on_track"
    UNDER_BUDGET_AHEAD_OF_SCHEDULE = "under_budget_ahead_of_schedule"
    UNDER_BUDGET_BEHIND_SCHEDULE = "under_budget_behind_schedule"
    OVER_BUDGET_AHEAD_OF_SCHEDULE = "over_budget_ahead_of_schedule"
    OVER_BUDGET_BEHIND_SCHEDULE = "over_budget_behind_schedule"


class Severity(str, Enum):
    INFO = "info"
    WARNING = "warning"
    CRITICAL = "critical"

    @property
    def rank(self) -> int:
        return {"info": 0, "warning": 1, "critical": 2}[self.value]


class CycleStep(str, Enum):
    """Verdict of one control-cycle evaluation."""

    PROCEED_NEXT_CYCLE = "proceed_next_cycle"
    INVESTIGATE_AND_CORRECT = "investigate_and_correct"


@dataclass(frozen=True)
class Thresholds:
    """Tunable ratios for severity grading and variance-typicality judgment."""

    warn_ratio: float = 0.05
    critical_ratio: float = 0.10
    typicality_cv: float = 0.10

    def __post_init__(self):
        if not (0 < self.warn_ratio < self.critical_ratio < 1):
            raise ValidationFailed("need 0 < warn_ratio < critical_ratio < 1", pointer="thresholds")
        if self.typicality_cv <= 0:
            raise ValidationFailed("typicality_cv must be > 0", pointer="thresholds.typicality_cv")


@dataclass(frozen=True)
class CorrectiveAction:
    """One rule from the corrective-action table.

    The rule fires when the report's quadrant matches and its severity is at
    least ``min_severity``.
    """

    id: str
    quadrant: PerformanceQuadrant
    min_severity: Severity
    description: str

    def matches(self, quadrant: PerformanceQuadrant, severity: Severity) -> bool:
        return self.quadrant is quadrant and severity.rank >= self.min_severity.rank


DEFAULT_ACTIONS: tuple[CorrectiveAction, ...] = (
    CorrectiveAction(
        id="overrun-late-review",
        quadrant=PerformanceQuadrant.OVER_BUDGET_BEHIND_SCHEDULE,
        min_severity=Severity.WARNING,
        description="Review cost drivers on late critical-path tasks; tighten change control.",
    ),
    CorrectiveAction(
        id="overrun-late-escalate",
        quadrant=PerformanceQuadrant.OVER_BUDGET_BEHIND_SCHEDULE,
        min_severity=Severity.CRITICAL,
        description="Escalate to the steering committee; review critical-path staffing and "
        "renegotiate scope or budget.",
    ),
    CorrectiveAction(
        id="overspend-fast-audit",
        quadrant=PerformanceQuadrant.OVER_BUDGET_AHEAD_OF_SCHEDULE,
        min_severity=Severity.WARNING,
        description="Audit the spend rate; confirm reported progress supports the pace.",
    ),
    CorrectiveAction(
        id="overspend-fast-throttle",
        quadrant=PerformanceQuadrant.OVER_BUDGET_AHEAD_OF_SCHEDULE,
        min_severity=Severity.CRITICAL,
        description="Throttle the burn rate; rebalance staffing toward the plan.",
    ),
    CorrectiveAction(
        id="lagging-underspend-staff",
        quadrant=PerformanceQuadrant.UNDER_BUDGET_BEHIND_SCHEDULE,
        min_severity=Severity.WARNING,
        description="Add resources to lagging tasks; spending headroom exists.",
    ),
    CorrectiveAction(
        id="lagging-underspend-crash",
        quadrant=PerformanceQuadrant.UNDER_BUDGET_BEHIND_SCHEDULE,
        min_severity=Severity.CRITICAL,
        description="Crash the schedule on the critical path using the unspent budget.",
    ),
)


@dataclass(frozen=True)
class TimeForecast:
    """Completion-time extrapolation: planned duration divided by SPI.

    This is a standard earned-value rule of thumb, not part of the indicator
    formula set proper; reports carry it flagged as an extrapolation.
    """

    start: TimePoint
    planned_finish: TimePoint
    planned_duration: float
    forecast_duration: float
    forecast_finish: TimePoint

    method = "planned_duration / SPI (extrapolation)"


@dataclass(frozen=True)
class DiagnosticReport:
    quadrant: PerformanceQuadrant
    quadrant_label: str
    severity: Severity
    recommended_variant: Optional[EacVariant]
    actions: tuple[CorrectiveAction, ...]
    time_forecast: Optional[TimeForecast] = None


def _sign(value: Decimal) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


def quadrant_of(cv: Decimal, sv: Decimal) -> PerformanceQuadrant:
    """Quadrant from the signs of the two variances alone."""
    cv_sign, sv_sign = _sign(cv), _sign(sv)
    if cv_sign == 0 and sv_sign == 0:
        return PerformanceQuadrant.ON_TRACK
    if cv_sign >= 0 and sv_sign >= 0:
        return PerformanceQuadrant.UNDER_BUDGET_AHEAD_OF_SCHEDULE
    if cv_sign >= 0 and sv_sign < 0:
        return PerformanceQuadrant.UNDER_BUDGET_BEHIND_SCHEDULE
    if cv_sign < 0 and sv_sign >= 0:
        return PerformanceQuadrant.OVER_BUDGET_AHEAD_OF_SCHEDULE
    return PerformanceQuadrant.OVER_BUDGET_BEHIND_SCHEDULE


def quadrant_label(cv: Decimal, sv: Decimal) -> str:
    """Display text; a zero variance collapses its axis out of the label."""
    cv_sign, sv_sign = _sign(cv), _sign(sv)
    if cv_sign == 0 and sv_sign == 0:
        return "on track"
    parts = []
    if cv_sign > 0:
        parts.append("under budget")
    elif cv_sign < 0:
        parts.append("over budget")
    if sv_sign > 0:
        parts.append("ahead of schedule")
    elif sv_sign < 0:
        parts.append("behind schedule")
    return " / ".join(parts)


def _severity_of(metrics: EvmMetrics, thresholds: Thresholds) -> Severity:
    worst = max(abs(metrics.cv), abs(metrics.sv))
    if worst == 0:
        return Severity.INFO
    if metrics.bac <= 0:
        # Nothing was budgeted, yet a variance exists: maximally severe.
        return Severity.CRITICAL
    # Decimal comparison keeps the grading exactly scale-free.
    ratio = money_div(worst, metrics.bac)
    if ratio >= Decimal(str(thresholds.critical_ratio)):
        return Severity.CRITICAL
    if ratio >= Decimal(str(thresholds.warn_ratio)):
        return Severity.WARNING
    return Severity.INFO


def classify(
    metrics: EvmMetrics,
    thresholds: Thresholds = Thresholds(),
    actions: Sequence[CorrectiveAction] = DEFAULT_ACTIONS,
) -> DiagnosticReport:
    """Grade one metrics set: quadrant, severity and matching corrective actions."""
    quadrant = quadrant_of(metrics.cv, metrics.sv)
    severity = _severity_of(metrics, thresholds)
    matched = tuple(
        sorted(
            (action for action in actions if action.matches(quadrant, severity)),
            key=lambda action: action.id,
        )
    )
    return DiagnosticReport(
        quadrant=quadrant,
        quadrant_label=quadrant_label(metrics.cv, metrics.sv),
        severity=severity,
        recommended_variant=metrics.selected_variant,
        actions=matched,
    )


def select_eac_variant(
    history: Sequence[EvmMetrics], thresholds: Thresholds = Thresholds()
) -> EacVariant:
    """Pick a forecast variant from how steady the cost index has been.

    Dispersion is the coefficient of variation (population standard deviation
    over mean) of the defined CPI values.  Low dispersion means the variances
    are typical and will recur; high dispersion means they are atypical.  A
    single defined CPI gives no dispersion to judge, so the plain
    performance-rate forecast is used.  The fresh-estimate variant is never
    auto-selected; it requires a human figure.
    """
    if not history:
        raise ValidationFailed("history must be non-empty", pointer="history")
    cpis = [m.cpi for m in history if m.cpi is not None]
    if not cpis:
        raise NoDefinedIndex("no snapshot in the history has a defined CPI")
    if len(cpis) == 1:
        return EacVariant.PERFORMANCE_RATE
    mean = statistics.fmean(cpis)
    spread = statistics.pstdev(cpis)
    if mean == 0:
        cov = 0.0  # non-negative values with zero mean are all zero
    else:
        cov = spread / abs(mean)
    if cov <= thresholds.typicality_cv:
        return EacVariant.TYPICAL_VARIANCE
    return EacVariant.ATYPICAL_VARIANCE


def forecast_time(baseline: Baseline, metrics: EvmMetrics) -> Optional[TimeForecast]:
    """Planned duration stretched by 1/SPI, anchored at the project start.

    Absent when SPI is undefined or zero.
    """
    if metrics.spi is None or metrics.spi <= 0:
        return None
    start = baseline.start
    planned_finish = baseline.finish
    planned_duration = float(planned_finish.ordinal() - start.ordinal())
    forecast_duration = planned_duration / metrics.spi
    # An extrapolated date, not an audit quantity: 4 places is plenty.
    finish_ordinal = round(float(start.ordinal()) + forecast_duration, 4)
    finish = TimePoint.from_ordinal(Decimal(str(finish_ordinal)), like=planned_finish)
    return TimeForecast(
        start=start,
        planned_finish=planned_finish,
        planned_duration=planned_duration,
        forecast_duration=forecast_duration,
        forecast_finish=finish,
    )


def auto_variant(
    history: Sequence[EvmMetrics], thresholds: Thresholds = Thresholds()
) -> EacVariant:
    """Variant selection with a defined-for-every-project fallback.

    When no CPI is defined anywhere in the history (no spend yet), the
    remaining-budget-at-plan-rates formula is the only defined forecast, so
    it is used.
    """
    try:
        return select_eac_variant(history, thresholds)
    except NoDefinedIndex:
        return EacVariant.ATYPICAL_VARIANCE


def evaluate_cycle(
    baseline: Baseline,
    snapshot: ProgressSnapshot,
    history: Sequence[EvmMetrics] = (),
    thresholds: Thresholds = Thresholds(),
    actions: Sequence[CorrectiveAction] = DEFAULT_ACTIONS,
) -> tuple[EvmMetrics, DiagnosticReport, CycleStep]:
    """Run one control-cycle evaluation.

    Computes the indicators for the snapshot (choosing the forecast variant
    from the prior history plus the current observation), grades them, and
    answers whether the next cycle can start or corrective analysis is due.
    Non-negative variances on both axes mean proceed.
    """
    provisional = compute_metrics(baseline, snapshot)
    variant = auto_variant(list(history) + [provisional], thresholds)
    metrics = compute_metrics(baseline, snapshot, policy=variant)
    report = classify(metrics, thresholds, actions)
    report = replace(report, time_forecast=forecast_time(baseline, metrics))
    if metrics.cv >= 0 and metrics.sv >= 0:
        step = CycleStep.PROCEED_NEXT_CYCLE
    else:
        step = CycleStep.INVESTIGATE_AND_CORRECT
    return metrics, report, step


def load_actions_doc(doc) -> tuple[CorrectiveAction, ...]:
    """Parse a corrective-action rules document: a list of
    ``{id, quadrant, min_severity, description}`` records."""
    if not isinstance(doc, list):
        raise ValidationFailed("rules document must be a list")
    actions = []
    seen: set[str] = set()
    for i, raw in enumerate(doc):
        if not isinstance(raw, dict):
            raise ValidationFailed("must be an object", pointer=f"[{i}]")
        rule_id = raw.get("id")
        if not isinstance(rule_id, str) or not rule_id:
            raise ValidationFailed("must be a non-empty string", pointer=f"[{i}].id")
        if rule_id in seen:
            raise ValidationFailed(f"duplicate rule id {rule_id!r}", pointer=f"[{i}].id")
        seen.add(rule_id)
        try:
            quadrant = PerformanceQuadrant(raw.get("quadrant"))
        except ValueError:
            raise ValidationFailed(f"unknown quadrant {raw.get('quadrant')!r}", pointer=f"[{i}].quadrant")
        try:
            min_severity = Severity(raw.get("min_severity"))
        except ValueError:
            raise ValidationFailed(
                f"unknown severity {raw.get('min_severity')!r}", pointer=f"[{i}].min_severity"
            )
        description = raw.get("description")
        if not isinstance(description, str) or not description:
            raise ValidationFailed("must be a non-empty string", pointer=f"[{i}].description")
        actions.append(
            CorrectiveAction(
                id=rule_id, quadrant=quadrant, min_severity=min_severity, description=description
            )
        )
    return tuple(actions)
