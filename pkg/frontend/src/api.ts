/** Thin typed client for the review service; the UI's only data path. */

import type {
  ApprovedNoteView,
  EditResult,
  MoveTag,
  QueueRow,
  ReviewPayload,
  SessionView,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    detail: string,
  ) {
    super(detail || code);
  }
}

async function request<T>(
  url: string,
  init: RequestInit = {},
): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json", ...(init.headers ?? {}) },
    ...init,
  });
  if (!response.ok) {
    let code = `HTTP ${response.status}`;
    let detail = "";
    try {
      const body = await response.json();
      code = body.error ?? code;
      detail = body.detail ?? "";
    } catch {
      // non-JSON error body; keep the status code
    }
    throw new ApiRequestError(response.status, code, detail);
  }
  return (await response.json()) as T;
}

export class ReviewApi {
  constructor(
    private readonly base: string = "",
    private readonly physicianId: string = "dr-demo",
  ) {}

  listCases(): Promise<QueueRow[]> {
    return request(`${this.base}/cases`);
  }

  triage(caseId: string): Promise<unknown> {
    return request(`${this.base}/cases/${caseId}/triage`, { method: "POST" });
  }

  draft(caseId: string): Promise<unknown> {
    return request(`${this.base}/cases/${caseId}/draft`, { method: "POST" });
  }

  review(caseId: string): Promise<ReviewPayload> {
    return request(`${this.base}/cases/${caseId}/review`);
  }

  openSession(caseId: string): Promise<SessionView> {
    return request(`${this.base}/cases/${caseId}/session`, {
      method: "POST",
      headers: { "X-Physician-Id": this.physicianId },
    });
  }

  submitEdit(
    caseId: string,
    sectionId: string,
    move: MoveTag,
    expectedBefore: string,
    afterText: string,
  ): Promise<EditResult> {
    return request(
      `${this.base}/cases/${caseId}/sections/${sectionId}/${move}`,
      {
        method: "PATCH",
        body: JSON.stringify({
          expected_before: expectedBefore,
          after_text: afterText,
        }),
      },
    );
  }

  confirmMedications(caseId: string, value: boolean): Promise<SessionView> {
    return request(`${this.base}/cases/${caseId}/confirm-medications`, {
      method: "POST",
      body: JSON.stringify({ value }),
    });
  }

  setFollowUp(caseId: string, interval: string): Promise<SessionView> {
    return request(`${this.base}/cases/${caseId}/follow-up`, {
      method: "POST",
      body: JSON.stringify({ interval }),
    });
  }

  approve(caseId: string): Promise<ApprovedNoteView> {
    return request(`${this.base}/cases/${caseId}/approve`, { method: "POST" });
  }

  noteUrl(caseId: string): string {
    return `${this.base}/cases/${caseId}/note.html`;
  }
}
