/** Typed client for the project-controls HTTP API.
 *
 * The dashboard talks to the service exclusively through this module; it
 * never computes indicator values itself.
 */

import type {
  ApiErrorBody,
  EacVariant,
  FeedEventDoc,
  IndicatorReport,
  LifecycleInfo,
  ModelForecast,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiRequestError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        throw new ApiRequestError(response.status, "error", response.statusText);
      }
      throw new ApiRequestError(response.status, body.error, body.detail);
    }
    return (await response.json()) as T;
  }

  getIndicators(projectId: string): Promise<IndicatorReport> {
    return this.request(`/action/indicators/${encodeURIComponent(projectId)}`);
  }

  getLifecycle(projectId: string): Promise<LifecycleInfo> {
    return this.request(`/lifecycle/${encodeURIComponent(projectId)}`);
  }

  getModelForecast(
    projectId: string,
    variant: EacVariant,
    newEtc?: string,
  ): Promise<ModelForecast> {
    const params = new URLSearchParams({ variant });
    if (newEtc !== undefined && newEtc !== "") {
      params.set("new_etc", newEtc);
    }
    return this.request(
      `/technique/models/${encodeURIComponent(projectId)}?${params.toString()}`,
    );
  }

  postLifecycleEvent(
    projectId: string,
    event: { kind: string; at: string | number; outcome?: "go" | "no_go" },
    role: string,
  ): Promise<LifecycleInfo> {
    return this.request(`/lifecycle/${encodeURIComponent(projectId)}/events`, {
      method: "POST",
      headers: { "Content-Type": "application/json", "X-Role": role },
      body: JSON.stringify(event),
    });
  }

  pollFeed(projectId: string, fromSeq: number): Promise<{ events: FeedEventDoc[] }> {
    return this.request(
      `/feed/${encodeURIComponent(projectId)}/events?from=${fromSeq}`,
    );
  }

  feedStreamUrl(projectId: string, fromSeq: number): string {
    return `${this.base}/feed/${encodeURIComponent(projectId)}?from=${fromSeq}`;
  }
}
