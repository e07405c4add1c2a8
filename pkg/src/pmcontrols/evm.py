"""Earned-value analysis core.

Pure functions over immutable baseline and progress-snapshot values.
Quantities follow the classic earned-value vocabulary:

    PV   planned value of work scheduled up to the status date
    EV   planned value of work actually performed
    AC   actual cost incurred
    BAC  total planned budget
    CV   EV - AC      (negative: over budget)
    SV   EV - PV      (negative: behind schedule)
    CPI  EV / AC
    SPI  EV / PV
    EAC  forecast total cost (four variants, see :class:`EacVariant`)
    ETC  EAC - AC
    VAC  BAC - EAC

Planned value accrues piecewise-linearly between the points of each task's
time-phased budget: zero before the first point, the full task budget at
and after the last point.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from enum import Enum
from typing import Mapping, Optional

from .errors import MissingEstimate, UndefinedIndex, UnknownTask, ValidationFailed
from .money import (
    DECIMAL_CONTEXT,
    TimePoint,
    exact_sub,
    format_money,
    money_div,
    parse_fraction,
    parse_money,
)

ZERO = Decimal("0.0000")
ONE = Decimal(1)


class EacVariant(str, Enum):
    """The four completion-cost forecast formulas.

    PERFORMANCE_RATE   BAC / CPI              cost rate so far continues
    NEW_ESTIMATE       AC + fresh ETC         original estimate discarded
    ATYPICAL_VARIANCE  AC + BAC - EV          variances so far will not recur
    TYPICAL_VARIANCE   AC + (BAC - EV) / CPI  variances so far will recur
    """

    PERFORMANCE_RATE = "performance_rate"
    NEW_ESTIMATE = "new_estimate"
    ATYPICAL_VARIANCE = "atypical_variance"
    TYPICAL_VARIANCE = "typical_variance"


@dataclass(frozen=True)
class TimePhasedBudget:
    """Cumulative planned cost at successive time points, ending at the task budget."""

    points: tuple[tuple[TimePoint, Decimal], ...]

    def __post_init__(self):
        if not self.points:
            raise ValidationFailed("time-phased budget needs at least one point", pointer="curve")
        previous_t: TimePoint | None = None
        previous_c: Decimal | None = None
        for i, (t, cumulative) in enumerate(self.points):
            if cumulative < 0:
                raise ValidationFailed("cumulative cost must be >= 0", pointer=f"curve[{i}].cumulative")
            if previous_t is not None:
                if not previous_t < t:
                    raise ValidationFailed(
                        "curve points must be strictly increasing in time", pointer=f"curve[{i}].t"
                    )
                if cumulative < previous_c:
                    raise ValidationFailed(
                        "cumulative cost must be non-decreasing", pointer=f"curve[{i}].cumulative"
                    )
            previous_t, previous_c = t, cumulative

    @property
    def start(self) -> TimePoint:
        return self.points[0][0]

    @property
    def finish(self) -> TimePoint:
        return self.points[-1][0]

    @property
    def final_value(self) -> Decimal:
        return self.points[-1][1]

    def value_at(self, status_date: TimePoint) -> Decimal:
        """Cumulative planned cost at ``status_date`` (piecewise-linear)."""
        first_t, _ = self.points[0]
        if status_date < first_t:
            return ZERO
        last_t, last_c = self.points[-1]
        if not status_date < last_t:
            return last_c
        # status_date sits in [first_t, last_t); find the enclosing segment.
        for (t0, c0), (t1, c1) in zip(self.points, self.points[1:]):
            if not status_date < t0 and status_date < t1:
                if status_date == t0:
                    return c0
                with localcontext(DECIMAL_CONTEXT):
                    span = t1.ordinal() - t0.ordinal()
                    elapsed = status_date.ordinal() - t0.ordinal()
                    return c0 + (c1 - c0) * elapsed / span
        return last_c  # pragma: no cover - unreachable given the guards above


@dataclass(frozen=True)
class TaskPlan:
    """A work-breakdown element: its budget and how that budget accrues over time."""

    task_id: str
    budget: Decimal
    distribution: TimePhasedBudget

    def __post_init__(self):
        if not self.task_id:
            raise ValidationFailed("task_id must be non-empty", pointer="task_id")
        if self.budget <= 0:
            raise ValidationFailed("budget must be > 0", pointer="budget")
        if self.distribution.final_value != self.budget:
            raise ValidationFailed(
                f"curve must end at the task budget "
                f"({format_money(self.distribution.final_value)} != {format_money(self.budget)})",
                pointer="curve",
            )


@dataclass(frozen=True)
class Baseline:
    """The time-phased plan a project is controlled against."""

    project_id: str
    tasks: tuple[TaskPlan, ...]

    def __post_init__(self):
        if not self.project_id:
            raise ValidationFailed("project_id must be non-empty", pointer="project_id")
        seen: set[str] = set()
        axis: bool | None = None
        for i, task in enumerate(self.tasks):
            if task.task_id in seen:
                raise ValidationFailed(f"duplicate task_id {task.task_id!r}", pointer=f"tasks[{i}].task_id")
            seen.add(task.task_id)
            task_axis = task.distribution.start.is_date
            if axis is None:
                axis = task_axis
            elif axis != task_axis:
                raise ValidationFailed(
                    "all tasks must use the same time-axis kind (dates or ordinals)",
                    pointer=f"tasks[{i}].curve",
                )

    @property
    def bac(self) -> Decimal:
        return sum((task.budget for task in self.tasks), ZERO)

    @property
    def start(self) -> TimePoint:
        if not self.tasks:
            raise ValidationFailed("baseline has no tasks")
        return min(task.distribution.start for task in self.tasks)

    @property
    def finish(self) -> TimePoint:
        if not self.tasks:
            raise ValidationFailed("baseline has no tasks")
        return max(task.distribution.finish for task in self.tasks)

    def plan_times(self) -> list[TimePoint]:
        """Sorted distinct union of every task's curve time points."""
        return sorted({t for task in self.tasks for t, _ in task.distribution.points})

    def budget_of(self, task_id: str) -> Decimal:
        for task in self.tasks:
            if task.task_id == task_id:
                return task.budget
        raise UnknownTask(f"task {task_id!r} is not in the baseline")

    @classmethod
    def from_doc(cls, doc) -> "Baseline":
        """Parse the baseline import document.

        Schema: ``{project_id, tasks: [{task_id, budget, curve: [{t, cumulative}]}]}``
        """
        if not isinstance(doc, dict):
            raise ValidationFailed("baseline document must be an object")
        project_id = doc.get("project_id")
        if not isinstance(project_id, str) or not project_id:
            raise ValidationFailed("must be a non-empty string", pointer="project_id")
        raw_tasks = doc.get("tasks")
        if not isinstance(raw_tasks, list) or not raw_tasks:
            raise ValidationFailed("must be a non-empty list", pointer="tasks")
        tasks = []
        for i, raw_task in enumerate(raw_tasks):
            if not isinstance(raw_task, dict):
                raise ValidationFailed("must be an object", pointer=f"tasks[{i}]")
            task_id = raw_task.get("task_id")
            if not isinstance(task_id, str) or not task_id:
                raise ValidationFailed("must be a non-empty string", pointer=f"tasks[{i}].task_id")
            budget = parse_money(raw_task.get("budget"), field=f"tasks[{i}].budget")
            raw_curve = raw_task.get("curve")
            if not isinstance(raw_curve, list) or not raw_curve:
                raise ValidationFailed("must be a non-empty list", pointer=f"tasks[{i}].curve")
            points = []
            for j, raw_point in enumerate(raw_curve):
                if not isinstance(raw_point, dict):
                    raise ValidationFailed("must be an object", pointer=f"tasks[{i}].curve[{j}]")
                t = TimePoint.parse(raw_point.get("t"), field=f"tasks[{i}].curve[{j}].t")
                cumulative = parse_money(
                    raw_point.get("cumulative"), field=f"tasks[{i}].curve[{j}].cumulative"
                )
                points.append((t, cumulative))
            try:
                distribution = TimePhasedBudget(tuple(points))
                tasks.append(TaskPlan(task_id=task_id, budget=budget, distribution=distribution))
            except ValidationFailed as exc:
                raise ValidationFailed(exc.message, pointer=f"tasks[{i}]")
        return cls(project_id=project_id, tasks=tuple(tasks))

    def to_doc(self) -> dict:
        return {
            "project_id": self.project_id,
            "tasks": [
                {
                    "task_id": task.task_id,
                    "budget": format_money(task.budget),
                    "curve": [
                        {"t": t.canonical(), "cumulative": format_money(c)}
                        for t, c in task.distribution.points
                    ],
                }
                for task in self.tasks
            ],
        }


@dataclass(frozen=True)
class TaskProgress:
    """Observed state of one task at a status date."""

    task_id: str
    percent_complete: Decimal
    actual_cost: Decimal

    def __post_init__(self):
        if not self.task_id:
            raise ValidationFailed("task_id must be non-empty", pointer="task_id")
        if not (0 <= self.percent_complete <= 1):
            raise ValidationFailed(
                "percent_complete must be within [0, 1]", pointer="percent_complete"
            )
        if self.actual_cost < 0:
            raise ValidationFailed("actual_cost must be >= 0", pointer="actual_cost")


@dataclass(frozen=True)
class ProgressSnapshot:
    """Per-task progress and spend observed at one status date."""

    project_id: str
    status_date: TimePoint
    entries: tuple[TaskProgress, ...]

    def __post_init__(self):
        if not self.project_id:
            raise ValidationFailed("project_id must be non-empty", pointer="project_id")
        seen: set[str] = set()
        for i, entry in enumerate(self.entries):
            if entry.task_id in seen:
                raise ValidationFailed(
                    f"duplicate task_id {entry.task_id!r}", pointer=f"entries[{i}].task_id"
                )
            seen.add(entry.task_id)

    @classmethod
    def from_doc(cls, doc) -> "ProgressSnapshot":
        """Parse the progress import document.

        Schema: ``{project_id, status_date, entries: [{task_id, percent_complete, actual_cost}]}``
        """
        if not isinstance(doc, dict):
            raise ValidationFailed("snapshot document must be an object")
        project_id = doc.get("project_id")
        if not isinstance(project_id, str) or not project_id:
            raise ValidationFailed("must be a non-empty string", pointer="project_id")
        status_date = TimePoint.parse(doc.get("status_date"), field="status_date")
        raw_entries = doc.get("entries")
        if not isinstance(raw_entries, list):
            raise ValidationFailed("must be a list", pointer="entries")
        entries = []
        for i, raw_entry in enumerate(raw_entries):
            if not isinstance(raw_entry, dict):
                raise ValidationFailed("must be an object", pointer=f"entries[{i}]")
            task_id = raw_entry.get("task_id")
            if not isinstance(task_id, str) or not task_id:
                raise ValidationFailed("must be a non-empty string", pointer=f"entries[{i}].task_id")
            percent = parse_fraction(
                raw_entry.get("percent_complete"), field=f"entries[{i}].percent_complete"
            )
            actual = parse_money(raw_entry.get("actual_cost"), field=f"entries[{i}].actual_cost")
            try:
                entries.append(
                    TaskProgress(task_id=task_id, percent_complete=percent, actual_cost=actual)
                )
            except ValidationFailed as exc:
                raise ValidationFailed(exc.message, pointer=f"entries[{i}]")
        return cls(project_id=project_id, status_date=status_date, entries=tuple(entries))

    def to_doc(self) -> dict:
        return {
            "project_id": self.project_id,
            "status_date": self.status_date.canonical(),
            "entries": [
                {
                    "task_id": entry.task_id,
                    "percent_complete": format(entry.percent_complete, "f"),
                    "actual_cost": format_money(entry.actual_cost),
                }
                for entry in self.entries
            ],
        }


@dataclass(frozen=True)
class EvmMetrics:
    """The full indicator set computed for one status date.

    ``cpi``/``spi`` are None while their denominators are zero; EAC variants
    whose preconditions fail are simply absent from ``eac_by_variant``.
    ``eac``/``etc``/``vac`` refer to the policy-selected variant and are None
    when that variant is unavailable.
    """

    status_date: TimePoint
    pv: Decimal
    ev: Decimal
    ac: Decimal
    bac: Decimal
    cv: Decimal
    sv: Decimal
    cpi: Optional[float]
    spi: Optional[float]
    eac_by_variant: Mapping[EacVariant, Decimal]
    selected_variant: Optional[EacVariant]
    eac: Optional[Decimal]
    etc: Optional[Decimal]
    vac: Optional[Decimal]


def validate_snapshot_against(baseline: Baseline, snapshot: ProgressSnapshot) -> None:
    """Raise unless every snapshot entry references a baseline task."""
    if baseline.project_id != snapshot.project_id:
        raise ValidationFailed(
            f"snapshot is for project {snapshot.project_id!r}, "
            f"baseline is for {baseline.project_id!r}"
        )
    known = {task.task_id for task in baseline.tasks}
    for entry in snapshot.entries:
        if entry.task_id not in known:
            raise UnknownTask(f"task {entry.task_id!r} is not in the baseline")


def compute_pv(baseline: Baseline, status_date: TimePoint) -> Decimal:
    """Planned value at the status date: sum of each task's accrued curve."""
    with localcontext(DECIMAL_CONTEXT):
        return sum((task.distribution.value_at(status_date) for task in baseline.tasks), ZERO)


def compute_ev(baseline: Baseline, snapshot: ProgressSnapshot) -> Decimal:
    """Earned value: percent complete times budget, summed over tasks.

    Tasks absent from the snapshot count as 0% complete.
    """
    validate_snapshot_against(baseline, snapshot)
    with localcontext(DECIMAL_CONTEXT):
        ev = ZERO
        for entry in snapshot.entries:
            ev += entry.percent_complete * baseline.budget_of(entry.task_id)
        return ev


def compute_ac(snapshot: ProgressSnapshot) -> Decimal:
    """Actual cost: sum of the entries' recorded spend."""
    return sum((entry.actual_cost for entry in snapshot.entries), ZERO)


def cost_variance(ev: Decimal, ac: Decimal) -> Decimal:
    """CV = EV - AC; negative means over budget."""
    return exact_sub(ev, ac)


def schedule_variance(ev: Decimal, pv: Decimal) -> Decimal:
    """SV = EV - PV; negative means behind schedule."""
    return exact_sub(ev, pv)


def cpi(ev: Decimal, ac: Decimal) -> float:
    """Cost performance index EV/AC; undefined before any spend."""
    if ac <= 0:
        raise UndefinedIndex("CPI is undefined: no actual cost recorded")
    return float(money_div(ev, ac))


def spi(ev: Decimal, pv: Decimal) -> float:
    """Schedule performance index EV/PV; undefined before any work is planned."""
    if pv <= 0:
        raise UndefinedIndex("SPI is undefined: no value planned yet")
    return float(money_div(ev, pv))


def eac(
    variant: EacVariant,
    bac: Decimal,
    ac: Decimal,
    ev: Decimal,
    new_etc: Optional[Decimal] = None,
) -> Decimal:
    """Estimate at completion under the chosen forecast formula.

    The CPI-based variants (PERFORMANCE_RATE, TYPICAL_VARIANCE) are computed
    as exact decimal expressions in EV and AC, so BAC/CPI never round-trips
    through a float.
    """
    if variant in (EacVariant.PERFORMANCE_RATE, EacVariant.TYPICAL_VARIANCE):
        if ac <= 0 or ev <= 0:
            raise UndefinedIndex(
                f"{variant.value} needs a defined, non-zero CPI (requires AC > 0 and EV > 0)"
            )
    with localcontext(DECIMAL_CONTEXT):
        if variant is EacVariant.PERFORMANCE_RATE:
            # BAC / CPI == BAC * AC / EV
            return bac * ac / ev
        if variant is EacVariant.NEW_ESTIMATE:
            if new_etc is None:
                raise MissingEstimate("new_estimate needs an explicit remaining-cost figure")
            if new_etc < 0:
                raise ValidationFailed("new_etc must be >= 0", pointer="new_etc")
            return ac + new_etc
        if variant is EacVariant.ATYPICAL_VARIANCE:
            return ac + bac - ev
        if variant is EacVariant.TYPICAL_VARIANCE:
            # AC + (BAC - EV) / CPI == AC + (BAC - EV) * AC / EV
            return ac + (bac - ev) * ac / ev
    raise ValidationFailed(f"unknown EAC variant: {variant!r}")  # pragma: no cover


def etc(eac_value: Decimal, ac: Decimal) -> Decimal:
    """Estimate to complete: what the remaining work will cost."""
    return exact_sub(eac_value, ac)


def vac(bac: Decimal, eac_value: Decimal) -> Decimal:
    """Variance at completion: negative means an expected overrun."""
    return exact_sub(bac, eac_value)


def compute_metrics(
    baseline: Baseline,
    snapshot: ProgressSnapshot,
    policy: EacVariant = EacVariant.ATYPICAL_VARIANCE,
    new_etc: Optional[Decimal] = None,
) -> EvmMetrics:
    """Compute the full indicator set for one snapshot.

    Every EAC variant whose preconditions hold is included; the
    policy-selected variant drives ``etc`` and ``vac``.  Undefined indices
    are None rather than errors, so a project-start report never fails.
    """
    validate_snapshot_against(baseline, snapshot)
    pv = compute_pv(baseline, snapshot.status_date)
    ev = compute_ev(baseline, snapshot)
    ac = compute_ac(snapshot)
    bac = baseline.bac

    cpi_value = float(money_div(ev, ac)) if ac > 0 else None
    spi_value = float(money_div(ev, pv)) if pv > 0 else None

    eac_by_variant: dict[EacVariant, Decimal] = {}
    for variant in EacVariant:
        try:
            eac_by_variant[variant] = eac(variant, bac, ac, ev, new_etc=new_etc)
        except (UndefinedIndex, MissingEstimate):
            continue

    selected_eac = eac_by_variant.get(policy)
    return EvmMetrics(
        status_date=snapshot.status_date,
        pv=pv,
        ev=ev,
        ac=ac,
        bac=bac,
        cv=cost_variance(ev, ac),
        sv=schedule_variance(ev, pv),
        cpi=cpi_value,
        spi=spi_value,
        eac_by_variant=eac_by_variant,
        selected_variant=policy,
        eac=selected_eac,
        etc=etc(selected_eac, ac) if selected_eac is not None else None,
        vac=vac(bac, selected_eac) if selected_eac is not None else None,
    )
