/** Dashboard bootstrap: fetch, render, subscribe, refresh.
 *
 * Query parameters: ?project=DESK-1&role=project_manager&api=http://host:port
 */

import { ApiClient, ApiRequestError } from "./api.js";
import { FeedCursor, subscribeFeed } from "./feed.js";
import {
  buildDashboardViewModel,
  emptyStateFor,
  undefinedIndexExplanation,
  whatIfView,
} from "./viewmodel.js";
import {
  renderDashboard,
  renderEmptyState,
  renderWhatIf,
  renderWhatIfError,
} from "./render.js";
import type { EacVariant, IndicatorReport } from "./types.js";

const params = new URLSearchParams(window.location.search);
const projectId = params.get("project") ?? "DESK-1";
const role = params.get("role") ?? "project_manager";
const apiBase = params.get("api") ?? "";

const api = new ApiClient(apiBase);
const root = document.getElementById("app") as HTMLElement;

let currentReport: IndicatorReport | null = null;

async function refresh(): Promise<void> {
  try {
    const lifecycle = await api.getLifecycle(projectId);
    let report: IndicatorReport;
    try {
      report = await api.getIndicators(projectId);
    } catch (error) {
      if (error instanceof ApiRequestError) {
        renderEmptyState(root, emptyStateFor(error.code, error.detail));
        return;
      }
      throw error;
    }
    currentReport = report;
    renderDashboard(root, buildDashboardViewModel(report, lifecycle, role), {
      onGate: async (kind, outcome) => {
        try {
          const event: { kind: string; at: string; outcome?: "go" | "no_go" } = {
            kind,
            at: report.metrics.status_date,
          };
          if (outcome) {
            event.outcome = outcome;
          }
          await api.postLifecycleEvent(projectId, event, role);
          await refresh();
        } catch (error) {
          if (error instanceof ApiRequestError) {
            alert(error.message); // surfaced verbatim
          }
        }
      },
      onWhatIf: async (variant, newEtc) => {
        const target = document.getElementById("whatif-result") as HTMLElement;
        try {
          const forecast = await api.getModelForecast(
            projectId,
            variant as EacVariant,
            newEtc || undefined,
          );
          if (currentReport) {
            renderWhatIf(target, whatIfView(forecast, currentReport));
          }
        } catch (error) {
          if (error instanceof ApiRequestError && error.code === "undefined_index") {
            renderWhatIfError(target, undefinedIndexExplanation(error.detail));
          } else if (error instanceof ApiRequestError) {
            renderWhatIfError(target, error.message);
          }
        }
      },
      onAcknowledge: () => {
        /* acknowledged actions are dimmed client-side only */
      },
    });
  } catch (error) {
    renderEmptyState(root, emptyStateFor("connection", String(error)));
  }
}

async function start(): Promise<void> {
  await refresh();
  const cursor = new FeedCursor(0);
  try {
    const replayed = await api.pollFeed(projectId, 0);
    cursor.acceptAll(replayed.events);
  } catch {
    /* a missing project still renders its empty state */
  }
  subscribeFeed(api.feedStreamUrl(projectId, cursor.lastSeq), cursor, () => {
    void refresh(); // any committed write refreshes the view, no reload
  });
}

void start();
