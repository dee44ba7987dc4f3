/**
 * Typed client for the annotation service's /api/v1/ JSON endpoints.
 *
 * The UI performs no stance or alignment computation of its own: every
 * alignment and every kappa shown to the user is a value the server sent.
 */

export type Label = "FAVOR" | "AGAINST" | "NONE";

export interface StanceRecord {
  id: string;
  text: string;
  target: string;
  label: Label;
  corpus: string;
  split: string;
  domain: string;
}

export interface Candidate {
  surface: string;
  char_start: number;
  char_end: number;
  label: Label | null;
}

export interface BatchItem {
  record: StanceRecord;
  candidates: Candidate[];
}

export interface NextResponse {
  exhausted: boolean;
  item?: BatchItem;
}

export interface VoteResponse {
  record_id: string;
  object_surface: string;
  label: Label;
  alignment: number | null;
  correction: boolean;
}

export interface AgreementPair {
  annotator_a: string;
  annotator_b: string;
  shared_items: number;
  kappa: number;
}

export interface Progress {
  items: number;
  objects: number;
  votes: number;
  sessions: Record<string, { annotator_id: string; votes: number }>;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.detail);
    this.code = body.error;
    this.status = status;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/v1${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  createSession(annotatorId: string): Promise<{ session_id: string; annotator_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator_id: annotatorId }),
    });
  }

  nextItem(sessionId: string): Promise<NextResponse> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/next`);
  }

  submitVote(
    sessionId: string,
    recordId: string,
    objectSurface: string,
    label: Label,
    correction = false,
  ): Promise<VoteResponse> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/votes`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        record_id: recordId,
        object_surface: objectSurface,
        label,
        correction,
      }),
    });
  }

  progress(): Promise<Progress> {
    return this.request("/progress");
  }

  agreement(): Promise<{ pairs: AgreementPair[] }> {
    return this.request("/agreement");
  }
}
