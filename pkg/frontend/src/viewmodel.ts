/** Pure view-model builders.
 *
 * Every displayed figure is a server-provided string taken verbatim from the
 * API payloads; the only numeric parsing here is for chart geometry.
 */

import type {
  CorrectiveActionPayload,
  EacVariant,
  IndicatorReport,
  LifecycleInfo,
  ModelForecast,
  SeriesPoint,
} from "./types.js";
import { EAC_VARIANTS } from "./types.js";

export const UNDEFINED_MARK = "—";

export interface ChartPoint {
  x: number;
  y: number;
  label: string;
  t: string;
}

export interface SCurveViewModel {
  pv: ChartPoint[];
  ev: ChartPoint[];
  ac: ChartPoint[];
}

export interface GaugeViewModel {
  text: string;
  defined: boolean;
}

export interface EacPanelRow {
  variant: EacVariant;
  value: string | null;
  recommended: boolean;
  note: string | null;
}

export interface GateButton {
  kind: string;
  enabled: boolean;
  tooltip: string | null;
  decision: boolean;
}

export interface DashboardViewModel {
  projectId: string;
  statusDate: string;
  sCurves: SCurveViewModel;
  gauges: { cpi: GaugeViewModel; spi: GaugeViewModel };
  quadrantBadge: { label: string; severity: string };
  eacPanel: EacPanelRow[];
  lifecyclePanel: { phase: string; buttons: GateButton[] };
  actionPanel: CorrectiveActionPayload[];
  nextStep: string;
  timeForecast: string | null;
}

function toOrdinal(t: string): number {
  if (/^\d{4}-\d{2}-\d{2}$/.test(t)) {
    return Date.parse(t + "T00:00:00Z") / 86_400_000;
  }
  return Number(t);
}

function toChartPoints(series: SeriesPoint[]): ChartPoint[] {
  return series.map((point) => ({
    x: toOrdinal(point.t),
    y: Number(point.value),
    label: point.value,
    t: point.t,
  }));
}

export function formatRatio(value: number | null): GaugeViewModel {
  if (value === null) {
    return { text: UNDEFINED_MARK, defined: false };
  }
  return { text: value.toFixed(3), defined: true };
}

const VARIANT_NOTES: Record<EacVariant, string> = {
  performance_rate: "cost rate so far continues",
  new_estimate: "actuals plus a fresh estimate",
  atypical_variance: "variances will not recur",
  typical_variance: "variances will recur",
};

export function variantNote(variant: EacVariant): string {
  return VARIANT_NOTES[variant];
}

export function buildEacPanel(report: IndicatorReport): EacPanelRow[] {
  return EAC_VARIANTS.map((variant) => {
    const value = report.metrics.eac_by_variant[variant] ?? null;
    let note: string | null = variantNote(variant);
    if (value === null) {
      note =
        variant === "new_estimate"
          ? "needs a remaining-cost figure (use what-if below)"
          : "index undefined: no actual cost recorded";
    }
    return {
      variant,
      value,
      recommended: report.diagnostics.recommended_variant === variant,
      note,
    };
  });
}

export function gateButtons(lifecycle: LifecycleInfo, role: string): GateButton[] {
  return lifecycle.allowed_events.map((kind) => {
    const permitted = lifecycle.allowed_event_roles?.[kind];
    const roleAllowed = permitted === undefined || permitted.includes(role);
    return {
      kind,
      enabled: roleAllowed,
      tooltip: roleAllowed
        ? null
        : `role ${role} may not record this event (needs: ${(permitted ?? []).join(", ")})`,
      decision: kind.startsWith("decision_"),
    };
  });
}

export function buildDashboardViewModel(
  report: IndicatorReport,
  lifecycle: LifecycleInfo,
  role: string,
): DashboardViewModel {
  const forecast = report.diagnostics.time_forecast;
  return {
    projectId: report.project_id,
    statusDate: report.metrics.status_date,
    sCurves: {
      pv: toChartPoints(report.s_curve.pv),
      ev: toChartPoints(report.s_curve.ev),
      ac: toChartPoints(report.s_curve.ac),
    },
    gauges: {
      cpi: formatRatio(report.metrics.cpi),
      spi: formatRatio(report.metrics.spi),
    },
    quadrantBadge: {
      label: report.diagnostics.quadrant_label,
      severity: report.diagnostics.severity,
    },
    eacPanel: buildEacPanel(report),
    lifecyclePanel: {
      phase: lifecycle.phase,
      buttons: gateButtons(lifecycle, role),
    },
    actionPanel: report.diagnostics.actions,
    nextStep: report.next_step,
    timeForecast: forecast
      ? `finish ~ ${forecast.forecast_finish} (${forecast.method})`
      : null,
  };
}

export interface WhatIfViewModel {
  variant: EacVariant;
  eac: string;
  etc: string;
  vac: string;
  recommendedVariant: EacVariant | null;
  recommendedEac: string | null;
  matchesVariant: EacVariant[];
}

/** Side-by-side what-if: the chosen forecast next to the recommended one,
 *  flagging any other variant whose value coincides. */
export function whatIfView(
  forecast: ModelForecast,
  report: IndicatorReport,
): WhatIfViewModel {
  const matches = EAC_VARIANTS.filter(
    (variant) =>
      variant !== forecast.variant &&
      report.metrics.eac_by_variant[variant] === forecast.eac,
  );
  const recommended = report.diagnostics.recommended_variant;
  return {
    variant: forecast.variant,
    eac: forecast.eac,
    etc: forecast.etc,
    vac: forecast.vac,
    recommendedVariant: recommended,
    recommendedEac: recommended ? report.metrics.eac_by_variant[recommended] ?? null : null,
    matchesVariant: matches,
  };
}

export interface EmptyStateViewModel {
  title: string;
  hint: string;
}

/** Connection and missing-data states are rendered, never blank screens. */
export function emptyStateFor(code: string, detail: string): EmptyStateViewModel {
  switch (code) {
    case "no_baseline":
      return {
        title: "No baseline yet",
        hint: "Import a time-phased baseline to begin progress control.",
      };
    case "no_snapshot":
      return {
        title: "No progress recorded",
        hint: "Record a progress snapshot to see indicators.",
      };
    case "unknown_project":
      return { title: "Unknown project", hint: detail };
    case "connection":
      return { title: "Service unreachable", hint: detail };
    default:
      return { title: code, hint: detail };
  }
}

export function undefinedIndexExplanation(detail: string): string {
  return `index undefined: ${detail}`;
}
