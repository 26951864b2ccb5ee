/**
 * Thin fetch client for the comparative-judgement service's /v1 API.
 *
 * All statistics shown in the UI originate here; the client performs no
 * computation beyond serializing requests and parsing responses.
 */

import type {
  ErrorBody,
  GradeReport,
  GradeScheme,
  JudgementAck,
  PendingPair,
  SessionInfo,
  SessionReport,
} from './types.js';

/** Error raised when the service answers with a non-2xx status. */
export class ApiError extends Error {
  /** HTTP status code of the response. */
  readonly status: number;
  /** Machine-readable error code from the response body. */
  readonly code: string;
  /** Extra context from the response body, e.g. the surviving pair on 409. */
  readonly detail: unknown;

  constructor(status: number, code: string, message: string, detail: unknown) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
    this.detail = detail;
  }

  /** True when the service rejected a judgement for a stale pair. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

/** Configuration for an {@link ApiClient}. */
export interface ApiClientOptions {
  /** Origin prefix for requests; empty string targets the serving origin. */
  baseUrl?: string;
  /** Bearer token sent with every request when the service requires one. */
  token?: string;
  /** Fetch implementation, injectable for tests. */
  fetchFn?: typeof fetch;
}

/** Item descriptor accepted by session creation. */
export interface NewItem {
  id: number;
  label: string;
  content_ref?: string | null;
}

/** Request client covering the /v1 endpoints the UI uses. */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string | null;
  private readonly fetchFn: typeof fetch;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = options.baseUrl ?? '';
    this.token = options.token ?? null;
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
  }

  /** Creates a session and returns its metadata. */
  createSession(items: NewItem[], selector: string, k: number): Promise<SessionInfo> {
    return this.request('POST', '/v1/sessions', { items, selector, k });
  }

  /** Fetches current session metadata. */
  getSession(sessionId: string): Promise<SessionInfo> {
    return this.request('GET', `/v1/sessions/${sessionId}`);
  }

  /** Fetches the pair to judge next, serving a new one if none is pending. */
  nextPair(sessionId: string): Promise<PendingPair> {
    return this.request('GET', `/v1/sessions/${sessionId}/next-pair`);
  }

  /** Records one judgement for the served pair. */
  submitJudgement(
    sessionId: string,
    left: number,
    right: number,
    winner: number,
    assessor?: string,
  ): Promise<JudgementAck> {
    const body: Record<string, unknown> = { left, right, winner };
    if (assessor !== undefined) {
      body.assessor = assessor;
    }
    return this.request('POST', `/v1/sessions/${sessionId}/judgements`, body);
  }

  /** Fetches the full report that drives the insight views. */
  report(sessionId: string): Promise<SessionReport> {
    return this.request('GET', `/v1/sessions/${sessionId}/report`);
  }

  /** Posts a grading scheme and returns per-item grade assignments. */
  grades(sessionId: string, scheme: GradeScheme): Promise<GradeReport> {
    return this.request('POST', `/v1/sessions/${sessionId}/grades`, scheme);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { accept: 'application/json' };
    if (body !== undefined) {
      headers['content-type'] = 'application/json';
    }
    if (this.token !== null) {
      headers.authorization = `Bearer ${this.token}`;
    }
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = 'unknown';
  let message = `request failed with status ${response.status}`;
  let detail: unknown = null;
  try {
    const parsed = (await response.json()) as Partial<ErrorBody>;
    if (typeof parsed.code === 'string') {
      code = parsed.code;
    }
    if (typeof parsed.message === 'string') {
      message = parsed.message;
    }
    detail = parsed.detail ?? null;
  } catch {
    // Non-JSON error body; keep the status-derived defaults.
  }
  return new ApiError(response.status, code, message, detail);
}
