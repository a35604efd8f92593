/** Typed client for the engine's JSON API.
 *
 * At most one /recommend request is in flight: submitting again aborts the
 * pending request, and a response from an aborted request is never handed
 * to the caller (its promise rejects with a "superseded" ApiError).
 */

import type {
  ApiError,
  ApiErrorPayload,
  HealthResponse,
  PoisResponse,
  RecommendRequest,
  RecommendResponse,
  ValidateRequest,
  ValidateResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export function isApiError(value: unknown): value is ApiError {
  return (
    typeof value === "object" &&
    value !== null &&
    typeof (value as ApiError).code === "string" &&
    typeof (value as ApiError).message === "string" &&
    typeof (value as ApiError).status === "number"
  );
}

function networkError(message: string): ApiError {
  return { status: 0, code: "network_error", message };
}

export const SUPERSEDED: ApiError = {
  status: 0,
  code: "superseded",
  message: "a newer submission replaced this request",
};

async function errorFromResponse(res: Response): Promise<ApiError> {
  let payload: Partial<ApiErrorPayload> = {};
  try {
    payload = (await res.json()) as Partial<ApiErrorPayload>;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return {
    status: res.status,
    code: payload.code ?? `http_${res.status}`,
    message: payload.message ?? res.statusText,
  };
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private inflight: AbortController | null = null;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async getJson<T>(path: string): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}${path}`);
    } catch (exc) {
      throw networkError(`cannot reach ${this.baseUrl}: ${String(exc)}`);
    }
    if (!res.ok) throw await errorFromResponse(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
        signal,
      });
    } catch (exc) {
      if (signal?.aborted) throw SUPERSEDED;
      throw networkError(`cannot reach ${this.baseUrl}: ${String(exc)}`);
    }
    if (!res.ok) throw await errorFromResponse(res);
    return (await res.json()) as T;
  }

  health(): Promise<HealthResponse> {
    return this.getJson<HealthResponse>("/health");
  }

  pois(): Promise<PoisResponse> {
    return this.getJson<PoisResponse>("/pois");
  }

  /** Submit a query. A still-pending earlier submission is aborted and its
   * promise rejects with SUPERSEDED, so only the latest result renders. */
  async recommend(body: RecommendRequest): Promise<RecommendResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const out = await this.postJson<RecommendResponse>(
        "/recommend",
        body,
        controller.signal,
      );
      if (controller.signal.aborted) throw SUPERSEDED;
      return out;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  validateConstraints(body: ValidateRequest): Promise<ValidateResponse> {
    return this.postJson<ValidateResponse>("/constraints/validate", body);
  }

  hasInflight(): boolean {
    return this.inflight !== null;
  }
}
