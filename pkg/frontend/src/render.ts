/** DOM rendering for the dashboard view model. */

import type {
  ChartPoint,
  DashboardViewModel,
  EmptyStateViewModel,
  GateButton,
  WhatIfViewModel,
} from "./viewmodel.js";
import { UNDEFINED_MARK } from "./viewmodel.js";

const CHART_W = 640;
const CHART_H = 280;
const PAD = 36;

function scale(points: ChartPoint[][]): (p: ChartPoint) => [number, number] {
  const all = points.flat();
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => p.y);
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const y0 = 0;
  const y1 = Math.max(...ys, 1);
  const sx = (CHART_W - 2 * PAD) / (x1 - x0 || 1);
  const sy = (CHART_H - 2 * PAD) / (y1 - y0 || 1);
  return (p) => [PAD + (p.x - x0) * sx, CHART_H - PAD - (p.y - y0) * sy];
}

function polyline(points: ChartPoint[], toPx: (p: ChartPoint) => [number, number]): string {
  return points.map((p) => toPx(p).map((v) => v.toFixed(1)).join(",")).join(" ");
}

/** The S-curve chart as an SVG string: PV (plan), EV and AC (observed). */
export function sCurveSvg(curves: { pv: ChartPoint[]; ev: ChartPoint[]; ac: ChartPoint[] }): string {
  const toPx = scale([curves.pv, curves.ev, curves.ac]);
  const series: Array<[ChartPoint[], string, string]> = [
    [curves.pv, "#5577cc", "PV"],
    [curves.ev, "#33a02c", "EV"],
    [curves.ac, "#e31a1c", "AC"],
  ];
  const lines = series
    .filter(([points]) => points.length > 0)
    .map(
      ([points, color, name]) =>
        `<polyline fill="none" stroke="${color}" stroke-width="2" ` +
        `data-series="${name}" data-points="${points.length}" ` +
        `points="${polyline(points, toPx)}"/>`,
    )
    .join("");
  return (
    `<svg viewBox="0 0 ${CHART_W} ${CHART_H}" role="img" aria-label="S-curve">` +
    `<rect width="${CHART_W}" height="${CHART_H}" fill="#fafafa"/>` +
    lines +
    `</svg>`
  );
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export interface DashboardHandlers {
  onGate(kind: string, outcome?: "go" | "no_go"): void;
  onWhatIf(variant: string, newEtc: string): void;
  onAcknowledge(actionId: string): void;
}

export function renderDashboard(
  root: HTMLElement,
  vm: DashboardViewModel,
  handlers: DashboardHandlers,
): void {
  root.innerHTML = "";

  const header = el("header", "header");
  header.append(
    el("h1", "title", `${vm.projectId}`),
    el("span", "status-date", `status date ${vm.statusDate}`),
    el("span", `badge severity-${vm.quadrantBadge.severity}`, vm.quadrantBadge.label),
    el("span", `next-step ${vm.nextStep}`, vm.nextStep.replace(/_/g, " ")),
  );
  root.append(header);

  const chart = el("section", "panel chart");
  chart.innerHTML = sCurveSvg(vm.sCurves);
  root.append(chart);

  const gauges = el("section", "panel gauges");
  for (const [name, gauge] of [["CPI", vm.gauges.cpi], ["SPI", vm.gauges.spi]] as const) {
    const box = el("div", `gauge ${gauge.defined ? "defined" : "undefined"}`);
    box.append(el("div", "gauge-name", name), el("div", "gauge-value", gauge.text));
    gauges.append(box);
  }
  if (vm.timeForecast) {
    gauges.append(el("div", "time-forecast", vm.timeForecast));
  }
  root.append(gauges);

  const eac = el("section", "panel eac");
  eac.append(el("h2", "panel-title", "completion forecasts"));
  for (const row of vm.eacPanel) {
    const line = el("div", `eac-row${row.recommended ? " recommended" : ""}`);
    line.append(
      el("span", "variant", row.variant.replace(/_/g, " ")),
      el("span", "value", row.value ?? UNDEFINED_MARK),
    );
    if (row.note) {
      line.append(el("span", "note", row.note));
    }
    eac.append(line);
  }
  const whatif = el("div", "whatif");
  const select = document.createElement("select");
  for (const row of vm.eacPanel) {
    const option = document.createElement("option");
    option.value = row.variant;
    option.textContent = row.variant.replace(/_/g, " ");
    select.append(option);
  }
  const input = document.createElement("input");
  input.placeholder = "remaining cost (for fresh estimate)";
  const button = document.createElement("button");
  button.textContent = "what if?";
  button.onclick = () => handlers.onWhatIf(select.value, input.value);
  whatif.append(select, input, button);
  const result = el("div", "whatif-result");
  result.id = "whatif-result";
  whatif.append(result);
  eac.append(whatif);
  root.append(eac);

  const lifecycle = el("section", "panel lifecycle");
  lifecycle.append(el("h2", "panel-title", `phase: ${vm.lifecyclePanel.phase.replace(/_/g, " ")}`));
  if (vm.lifecyclePanel.buttons.length === 0) {
    lifecycle.append(el("div", "terminal", "no further actions: the lifecycle is complete"));
  }
  for (const gate of vm.lifecyclePanel.buttons) {
    lifecycle.append(...gateButtonElements(gate, handlers));
  }
  root.append(lifecycle);

  const actions = el("section", "panel actions");
  actions.append(el("h2", "panel-title", "suggested corrective actions"));
  if (vm.actionPanel.length === 0) {
    actions.append(el("div", "no-actions", "none"));
  }
  for (const action of vm.actionPanel) {
    const row = el("div", "action-row");
    row.append(el("span", "action-text", action.description));
    const ack = document.createElement("button");
    ack.textContent = "acknowledge";
    ack.onclick = () => {
      handlers.onAcknowledge(action.id);
      row.classList.add("acknowledged");
      ack.disabled = true;
    };
    row.append(ack);
    actions.append(row);
  }
  root.append(actions);
}

function gateButtonElements(gate: GateButton, handlers: DashboardHandlers): HTMLElement[] {
  const make = (label: string, outcome?: "go" | "no_go") => {
    const button = document.createElement("button");
    button.className = `gate-button ${gate.kind}`;
    button.textContent = label;
    button.disabled = !gate.enabled;
    if (gate.tooltip) {
      button.title = gate.tooltip;
    }
    button.onclick = () => handlers.onGate(gate.kind, outcome);
    return button;
  };
  if (gate.decision) {
    const go = gate.kind === "decision_bid_no_bid" ? "bid" : "win";
    const noGo = gate.kind === "decision_bid_no_bid" ? "no bid" : "loss";
    return [make(go, "go"), make(noGo, "no_go")];
  }
  return [make(gate.kind.replace(/_/g, " "))];
}

export function renderWhatIf(target: HTMLElement, vm: WhatIfViewModel): void {
  const same =
    vm.matchesVariant.length > 0
      ? ` (equal to ${vm.matchesVariant.map((v) => v.replace(/_/g, " ")).join(", ")})`
      : "";
  target.textContent =
    `${vm.variant.replace(/_/g, " ")}: EAC ${vm.eac}, ETC ${vm.etc}, VAC ${vm.vac}${same}` +
    (vm.recommendedVariant && vm.recommendedEac
      ? ` | recommended ${vm.recommendedVariant.replace(/_/g, " ")}: ${vm.recommendedEac}`
      : "");
}

export function renderWhatIfError(target: HTMLElement, message: string): void {
  target.textContent = message;
}

export function renderEmptyState(root: HTMLElement, state: EmptyStateViewModel): void {
  root.innerHTML = "";
  const box = el("section", "panel empty-state");
  box.append(el("h2", "empty-title", state.title), el("p", "empty-hint", state.hint));
  root.append(box);
}
