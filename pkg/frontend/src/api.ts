/** Thin HTTP client for the questionnaire service. Carries no display logic. */

import type {
  CodeRef,
  MutationResult,
  RulebaseSummary,
  SessionCreated,
  SessionState,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asApiError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the HTTP line
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      throw await asApiError(response);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    return (await response.json()) as T;
  }

  listRulebases(): Promise<RulebaseSummary[]> {
    return this.request("/rulebases");
  }

  createSession(rulebaseId: string, drugs: string[]): Promise<SessionCreated> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ rulebaseId, drugs }),
    });
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${sessionId}`);
  }

  answer(
    sessionId: string,
    conditionId: string,
    checked: boolean,
    code?: Pick<CodeRef, "system" | "value">,
  ): Promise<MutationResult> {
    return this.request(`/sessions/${sessionId}/answers`, {
      method: "POST",
      body: JSON.stringify({ conditionId, checked, code }),
    });
  }

  setDrugs(sessionId: string, drugs: string[]): Promise<MutationResult> {
    return this.request(`/sessions/${sessionId}/drugs`, {
      method: "PUT",
      body: JSON.stringify({ drugs }),
    });
  }

  deleteSession(sessionId: string): Promise<void> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }
}
