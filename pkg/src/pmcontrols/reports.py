"""Builds the canonical report payloads served over HTTP and printed by the CLI.

All money values are rendered as fixed-point strings so that the same
numbers come out of the library, the CLI and the service byte-for-byte.
"""

from __future__ import annotations

from decimal import Decimal
from typing import Optional, Sequence

from .diagnostics import (
    CorrectiveAction,
    CycleStep,
    DiagnosticReport,
    Thresholds,
    DEFAULT_ACTIONS,
    evaluate_cycle,
)
from .errors import NoBaseline, NoSnapshot
from .evm import (
    Baseline,
    EacVariant,
    EvmMetrics,
    ProgressSnapshot,
    compute_ac,
    compute_ev,
    compute_metrics,
    compute_pv,
    eac as eac_of,
    etc as etc_of,
    vac as vac_of,
)
from .lifecycle import ProjectRecord, allowed_events
from .money import TimePoint, format_money
from .storage import StoredProject


def require_baseline(record: ProjectRecord) -> Baseline:
    if record.baseline is None:
        raise NoBaseline(f"project {record.project_id!r} has no baseline")
    return record.baseline


def latest_snapshot(record: ProjectRecord) -> ProgressSnapshot:
    if not record.snapshots:
        raise NoSnapshot(f"project {record.project_id!r} has no snapshots")
    return record.snapshots[-1]


def snapshot_at_or_before(record: ProjectRecord, status_date: TimePoint) -> ProgressSnapshot:
    candidates = [s for s in record.snapshots if not status_date < s.status_date]
    if not candidates:
        raise NoSnapshot(
            f"project {record.project_id!r} has no snapshot at or before "
            f"{status_date.canonical()}"
        )
    return candidates[-1]


def metrics_payload(metrics: EvmMetrics) -> dict:
    return {
        "status_date": metrics.status_date.canonical(),
        "pv": format_money(metrics.pv),
        "ev": format_money(metrics.ev),
        "ac": format_money(metrics.ac),
        "bac": format_money(metrics.bac),
        "cv": format_money(metrics.cv),
        "sv": format_money(metrics.sv),
        "cpi": metrics.cpi,
        "spi": metrics.spi,
        "eac_by_variant": {
            variant.value: format_money(value) for variant, value in metrics.eac_by_variant.items()
        },
        "selected_variant": metrics.selected_variant.value if metrics.selected_variant else None,
        "eac": format_money(metrics.eac) if metrics.eac is not None else None,
        "etc": format_money(metrics.etc) if metrics.etc is not None else None,
        "vac": format_money(metrics.vac) if metrics.vac is not None else None,
    }


def diagnostics_payload(report: DiagnosticReport) -> dict:
    forecast = None
    if report.time_forecast is not None:
        tf = report.time_forecast
        forecast = {
            "planned_duration": tf.planned_duration,
            "forecast_duration": tf.forecast_duration,
            "forecast_finish": tf.forecast_finish.canonical(),
            "method": tf.method,
        }
    return {
        "quadrant": report.quadrant.value,
        "quadrant_label": report.quadrant_label,
        "severity": report.severity.value,
        "recommended_variant": (
            report.recommended_variant.value if report.recommended_variant else None
        ),
        "actions": [
            {
                "id": action.id,
                "quadrant": action.quadrant.value,
                "min_severity": action.min_severity.value,
                "description": action.description,
            }
            for action in report.actions
        ],
        "time_forecast": forecast,
    }


def indices_payload(stored: StoredProject, status_date: Optional[TimePoint] = None) -> dict:
    """Raw quantities only; no derived indicator ever appears here."""
    record = stored.record
    baseline = require_baseline(record)
    if status_date is None:
        snapshot = latest_snapshot(record)
        status_date = snapshot.status_date
    else:
        snapshot = snapshot_at_or_before(record, status_date)
    return {
        "project_id": record.project_id,
        "status_date": status_date.canonical(),
        "pv": format_money(compute_pv(baseline, status_date)),
        "ev": format_money(compute_ev(baseline, snapshot)),
        "ac": format_money(compute_ac(snapshot)),
        "bac": format_money(baseline.bac),
    }


def model_payload(
    stored: StoredProject, variant: EacVariant, new_etc: Optional[Decimal] = None
) -> dict:
    """Forecast values for one requested variant; no raw series."""
    record = stored.record
    baseline = require_baseline(record)
    snapshot = latest_snapshot(record)
    ev = compute_ev(baseline, snapshot)
    ac = compute_ac(snapshot)
    eac_value = eac_of(variant, baseline.bac, ac, ev, new_etc=new_etc)
    return {
        "project_id": record.project_id,
        "status_date": snapshot.status_date.canonical(),
        "variant": variant.value,
        "eac": format_money(eac_value),
        "etc": format_money(etc_of(eac_value, ac)),
        "vac": format_money(vac_of(baseline.bac, eac_value)),
    }


def s_curve_payload(record: ProjectRecord) -> dict:
    """Three series for S-curve rendering.

    PV is evaluated at every distinct plan date; EV and AC get one point per
    recorded snapshot.
    """
    baseline = require_baseline(record)
    pv_series = [
        {"t": t.canonical(), "value": format_money(compute_pv(baseline, t))}
        for t in baseline.plan_times()
    ]
    ev_series = []
    ac_series = []
    for snapshot in record.snapshots:
        t = snapshot.status_date.canonical()
        ev_series.append({"t": t, "value": format_money(compute_ev(baseline, snapshot))})
        ac_series.append({"t": t, "value": format_money(compute_ac(snapshot))})
    return {"pv": pv_series, "ev": ev_series, "ac": ac_series}


def history_metrics(record: ProjectRecord) -> list[EvmMetrics]:
    """Indicator sets for every snapshot, oldest first (for trend analysis)."""
    baseline = require_baseline(record)
    return [compute_metrics(baseline, snapshot) for snapshot in record.snapshots]


def indicator_payload(
    stored: StoredProject,
    thresholds: Thresholds = Thresholds(),
    actions: Sequence[CorrectiveAction] = DEFAULT_ACTIONS,
) -> dict:
    """The full decision report: metrics, diagnostics and chart series."""
    record = stored.record
    baseline = require_baseline(record)
    snapshot = latest_snapshot(record)
    history = history_metrics(record)[:-1]
    metrics, report, step = evaluate_cycle(
        baseline, snapshot, history=history, thresholds=thresholds, actions=actions
    )
    return {
        "project_id": record.project_id,
        "revision": stored.revision,
        "metrics": metrics_payload(metrics),
        "diagnostics": diagnostics_payload(report),
        "s_curve": s_curve_payload(record),
        "next_step": step.value,
    }


def lifecycle_payload(stored: StoredProject, role_map=None) -> dict:
    record = stored.record
    allowed = sorted(allowed_events(record), key=lambda kind: kind.value)
    payload = {
        "project_id": record.project_id,
        "revision": stored.revision,
        "phase": record.phase.value,
        "allowed_events": [kind.value for kind in allowed],
        "history": [event.to_doc() for event in record.history],
        "has_baseline": record.baseline is not None,
        "snapshot_count": len(record.snapshots),
    }
    if role_map is not None:
        payload["allowed_event_roles"] = {
            kind.value: sorted(role_map.get(kind, ())) for kind in allowed
        }
    return payload


def project_summary(stored: StoredProject) -> dict:
    record = stored.record
    return {
        "project_id": record.project_id,
        "phase": record.phase.value,
        "revision": stored.revision,
        "has_baseline": record.baseline is not None,
        "snapshot_count": len(record.snapshots),
    }
