// Client for the engine's HTTP contract. The fetch function is injectable
// so tests can intercept every payload the UI consumes.

import type {
  CatalogEntry,
  DatasetInfo,
  PredictResponse,
  ProvenancePayload,
  TraceDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface PredictBody {
  model: string;
  task: string;
  dataset?: string;
  graph_json?: unknown;
  target?: number | number[] | null;
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorName: string,
    detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

export class EngineClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      throw new ApiError(
        response.status,
        (body as { error?: string }).error ?? "EngineError",
        (body as { detail?: string }).detail ?? response.statusText,
      );
    }
    return (await response.json()) as T;
  }

  listModels(): Promise<CatalogEntry[]> {
    return this.request("/v1/models");
  }

  listDatasets(): Promise<DatasetInfo[]> {
    return this.request("/v1/datasets");
  }

  predict(body: PredictBody): Promise<PredictResponse> {
    return this.request("/v1/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  trace(traceId: string): Promise<TraceDoc> {
    return this.request(`/v1/trace/${traceId}`);
  }

  provenance(
    traceId: string,
    stepId: string,
    cell: number,
  ): Promise<ProvenancePayload> {
    const query = `step=${encodeURIComponent(stepId)}&cell=${cell}`;
    return this.request(`/v1/trace/${traceId}/provenance?${query}`);
  }
}
