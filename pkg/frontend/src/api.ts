// Typed client for the annotation service. This module is the only place
// that talks HTTP; everything else works with the types below.

export type Label = 0 | 1;
export type Source = "human" | "model_approved";

export interface Suggestion {
  candidate_id: string | null;
  label: Label;
  confidence: number; // max class probability, in [0.5, 1]
  offered: boolean; // confidence cleared the service threshold
  model_version: number;
}

export interface CandidateItem {
  candidate_id: string;
  tokens: string[]; // exactly 11, empty strings are padding
  center_index: number;
  violent_word: string;
  network: string;
  suggestion: Suggestion | null; // null before the first model exists
}

export interface CandidatePage {
  candidates: CandidateItem[];
  pending_total: number;
}

export interface Metrics {
  sensitivity: number | null;
  specificity: number | null;
  precision: number | null;
  auc: number | null;
  accuracy: number | null;
}

export interface ModelInfo {
  version: number;
  training_size: number;
  metrics: Metrics;
  created: string;
  seed: number;
  model_file: string;
  group_metrics: Record<string, Record<string, Metrics>>;
}

export interface AnnotationPayload {
  candidate_id: string;
  label: Label;
  annotator: string;
  subject?: string | null;
  object?: string | null;
  source: Source;
}

export interface AnnotationReceipt {
  id: string;
  candidate_id: string;
  label: Label;
  source: Source;
}

export interface GroupedMetrics {
  group_by: string;
  groups: Record<string, Metrics>;
}

/** status 0 means the request never reached the service. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(status === 0 ? detail : `${status}: ${detail}`);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  private fetchImpl: FetchLike;

  constructor(
    private base = "",
    fetchImpl?: FetchLike,
  ) {
    // bind lazily so the browser's fetch keeps its expected receiver
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, err instanceof Error ? err.message : String(err));
    }
    if (!res.ok) {
      let detail = res.statusText || `HTTP ${res.status}`;
      try {
        const body = (await res.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body, keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  getCandidates(status: "pending" | "all" = "pending", limit = 50): Promise<CandidatePage> {
    return this.request(`/api/candidates?status=${status}&limit=${limit}`);
  }

  suggest(tokens: string[]): Promise<Suggestion> {
    return this.request("/api/suggest", postJson({ tokens }));
  }

  postAnnotation(payload: AnnotationPayload): Promise<AnnotationReceipt> {
    return this.request("/api/annotations", postJson(payload));
  }

  retrain(seed?: number): Promise<ModelInfo> {
    return this.request("/api/retrain", postJson(seed === undefined ? {} : { seed }));
  }

  /** Active model, or null while the service is cold (it answers 409). */
  async getModel(): Promise<ModelInfo | null> {
    try {
      return await this.request<ModelInfo>("/api/model");
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) return null;
      throw err;
    }
  }

  getGroupedMetrics(groupBy: "violent_word" | "network"): Promise<GroupedMetrics> {
    return this.request(`/api/metrics?group_by=${groupBy}`);
  }
}

function postJson(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  };
}
