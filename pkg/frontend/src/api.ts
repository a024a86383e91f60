import {
  ApiError,
  CriterionInfo,
  LabelAck,
  LabelForm,
  Progress,
  QueueNextResponse,
  ReportPayload,
} from "./types.js";

/** Thin typed client over the curation service HTTP API. The base URL is
 * the only configuration the UI has. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await res.json().catch(() => ({}));
    if (!res.ok) {
      const message =
        typeof body?.error === "string" ? body.error : `HTTP ${res.status}`;
      throw new ApiError(res.status, message, body?.fields ?? []);
    }
    return body as T;
  }

  criteria(): Promise<CriterionInfo[]> {
    return this.request<CriterionInfo[]>("/api/criteria");
  }

  queueNext(criterion: string, curator: string): Promise<QueueNextResponse> {
    const params = new URLSearchParams({ criterion, curator });
    return this.request<QueueNextResponse>(`/api/queue/next?${params}`);
  }

  submitLabel(form: LabelForm): Promise<LabelAck> {
    return this.request<LabelAck>("/api/labels", {
      method: "POST",
      body: JSON.stringify(form),
    });
  }

  progress(criterion: string): Promise<Progress> {
    const params = new URLSearchParams({ criterion });
    return this.request<Progress>(`/api/progress?${params}`);
  }

  /** null when the evaluation has not been built yet. */
  async report(criterion: string, format = "md"): Promise<ReportPayload | null> {
    try {
      return await this.request<ReportPayload>(
        `/api/reports/${encodeURIComponent(criterion)}?format=${format}`,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        return null;
      }
      throw err;
    }
  }
}
