// Thin typed client over the /v1 API. Every JSON payload that arrives is
// recorded so tests can audit that no displayed number was invented here.

import type {
  Analysis, Annotation, Dimensions, Distribution, GradCam, LabelMatrix,
  Metrics, RecordDetail, RunStatus, TrackResult, Trajectory,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly payloads: unknown[] = [];

  constructor(private base = "/v1",
              private fetchImpl: FetchLike = (...args) => fetch(...args)) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body.code ?? "internal",
                         body.message ?? "request failed");
    }
    this.payloads.push(body);
    return body as T;
  }

  listRuns(): Promise<{ runs: string[] }> {
    return this.request("/runs");
  }

  status(runId: string): Promise<RunStatus> {
    return this.request(`/runs/${runId}/status`);
  }

  metrics(runId: string): Promise<Metrics> {
    return this.request(`/runs/${runId}/metrics`);
  }

  paramProjection(runId: string, layer = "all"): Promise<Trajectory> {
    const suffix = layer === "all" ? "" : `?layer=${encodeURIComponent(layer)}`;
    return this.request(`/runs/${runId}/param-projection${suffix}`);
  }

  analyze(runId: string, round: number, signal?: AbortSignal,
          options: { k?: number; alpha?: number; source?: string } = {}): Promise<Analysis> {
    const body: Record<string, unknown> = { "input-source": options.source ?? "local" };
    if (options.k != null) body.k = options.k;
    if (options.alpha != null) body.alpha = options.alpha;
    return this.request(`/runs/${runId}/rounds/${round}/analyze`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  dimensions(cluster: number, entrance: "ccpca" | "gradcam",
             channel?: number): Promise<Dimensions | GradCam> {
    const params = new URLSearchParams({ entrance });
    if (channel != null) params.set("channel", String(channel));
    return this.request(`/analysis/cluster/${cluster}/dimensions?${params}`);
  }

  labelMatrix(grid: number, cluster: number | null): Promise<LabelMatrix> {
    const params = new URLSearchParams({ grid: String(grid) });
    if (cluster != null) params.set("cluster", String(cluster));
    return this.request(`/analysis/label-matrix?${params}`);
  }

  distribution(dim: number, bins = 20): Promise<Distribution> {
    return this.request(`/analysis/dimension/${dim}/distribution?bins=${bins}`);
  }

  record(id: number): Promise<RecordDetail> {
    return this.request(`/analysis/record/${id}`);
  }

  setCombine(annotationIds: number[], cluster: number | null,
             mode: "intersection" | "union"):
      Promise<{ record_ids: number[]; count: number }> {
    return this.request("/analysis/set-combine", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ annotation_ids: annotationIds, cluster, mode }),
    });
  }

  listAnnotations(): Promise<{ annotations: Annotation[] }> {
    return this.request("/annotations");
  }

  annotate(recordIds: number[], note: string, round: number,
           sourceCluster: number | null): Promise<Annotation> {
    return this.request("/annotations", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ record_ids: recordIds, note, round,
                             source_cluster: sourceCluster }),
    });
  }

  deleteAnnotation(id: number): Promise<{ deleted: number }> {
    return this.request(`/annotations/${id}`, { method: "DELETE" });
  }

  track(id: number, round: number): Promise<TrackResult> {
    return this.request(`/annotations/${id}/track?round=${round}`);
  }

  /** Every finite number seen in any payload, as display strings. */
  numberVocabulary(): Set<string> {
    const seen = new Set<string>();
    const walk = (value: unknown) => {
      if (typeof value === "number" && Number.isFinite(value)) {
        seen.add(String(value));
      } else if (Array.isArray(value)) {
        value.forEach(walk);
      } else if (value && typeof value === "object") {
        Object.values(value).forEach(walk);
      }
    };
    this.payloads.forEach(walk);
    return seen;
  }
}
