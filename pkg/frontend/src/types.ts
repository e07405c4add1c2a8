/** Wire types for the project-controls HTTP API. */

export type EacVariant =
  | "performance_rate"
  | "new_estimate"
  | "atypical_variance"
  | "typical_variance";

export const EAC_VARIANTS: EacVariant[] = [
  "performance_rate",
  "new_estimate",
  "atypical_variance",
  "typical_variance",
];

export interface SeriesPoint {
  t: string;
  value: string;
}

export interface SCurvePayload {
  pv: SeriesPoint[];
  ev: SeriesPoint[];
  ac: SeriesPoint[];
}

export interface MetricsPayload {
  status_date: string;
  pv: string;
  ev: string;
  ac: string;
  bac: string;
  cv: string;
  sv: string;
  cpi: number | null;
  spi: number | null;
  eac_by_variant: Partial<Record<EacVariant, string>>;
  selected_variant: EacVariant | null;
  eac: string | null;
  etc: string | null;
  vac: string | null;
}

export interface CorrectiveActionPayload {
  id: string;
  quadrant: string;
  min_severity: string;
  description: string;
}

export interface TimeForecastPayload {
  planned_duration: number;
  forecast_duration: number;
  forecast_finish: string;
  method: string;
}

export interface DiagnosticsPayload {
  quadrant: string;
  quadrant_label: string;
  severity: "info" | "warning" | "critical";
  recommended_variant: EacVariant | null;
  actions: CorrectiveActionPayload[];
  time_forecast: TimeForecastPayload | null;
}

export interface IndicatorReport {
  project_id: string;
  revision: number;
  metrics: MetricsPayload;
  diagnostics: DiagnosticsPayload;
  s_curve: SCurvePayload;
  next_step: "proceed_next_cycle" | "investigate_and_correct";
}

export interface LifecycleEventDoc {
  kind: string;
  role: string;
  at: string;
  outcome: "go" | "no_go" | null;
}

export interface LifecycleInfo {
  project_id: string;
  revision: number;
  phase: string;
  allowed_events: string[];
  allowed_event_roles?: Record<string, string[]>;
  history: LifecycleEventDoc[];
  has_baseline: boolean;
  snapshot_count: number;
}

export interface ModelForecast {
  project_id: string;
  status_date: string;
  variant: EacVariant;
  eac: string;
  etc: string;
  vac: string;
}

export interface FeedEventDoc {
  seq: number;
  project_id: string;
  kind: "snapshot_recorded" | "phase_changed" | "baseline_set" | "decision_recorded";
  payload: Record<string, unknown>;
  revision: number;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}
