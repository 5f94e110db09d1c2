/** Thin client for the trial service; all traffic goes through /api/v1. */

import type {
  ResponseAck,
  SessionInfo,
  TrialPayload,
} from "./types.js";

export interface ResponseSubmission {
  session_id: string;
  index: number;
  rating: number;
  elapsed_ms: number;
  client_ts?: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  async health(): Promise<{ status: string }> {
    return parseOrThrow(await fetch(this.url("/health")));
  }

  async createSession(alias: string): Promise<SessionInfo> {
    return parseOrThrow(
      await fetch(this.url("/session"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ alias }),
      }),
    );
  }

  async getTrial(sessionId: string, index: number): Promise<TrialPayload> {
    return parseOrThrow(
      await fetch(this.url(`/session/${sessionId}/trial/${index}`)),
    );
  }

  async submitResponse(submission: ResponseSubmission): Promise<ResponseAck> {
    return parseOrThrow(
      await fetch(this.url("/response"), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(submission),
      }),
    );
  }

  async report(): Promise<unknown> {
    return parseOrThrow(await fetch(this.url("/report")));
  }
}
