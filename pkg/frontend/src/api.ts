/** Gateway HTTP client. The draft prompt is only ever sent to this origin. */

import type {
  DispatchResponse,
  MaskResponse,
  MentionEdit,
  TranscriptRecord,
  VaultSnapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let code = `HTTP_${resp.status}`;
    let message = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.code === "string") code = body.code;
      if (body && typeof body.message === "string") message = body.message;
    } catch {
      // non-JSON error body; keep the HTTP status
    }
    throw new ApiError(code, message, resp.status);
  }
  return (await resp.json()) as T;
}

export class GatewayClient {
  constructor(private readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async createSession(): Promise<string> {
    const body = await request<{ id: string }>(this.url("/v1/sessions"), {
      method: "POST",
      body: "{}",
    });
    return body.id;
  }

  mask(sessionId: string, prompt: string): Promise<MaskResponse> {
    return request<MaskResponse>(this.url(`/v1/sessions/${sessionId}/mask`), {
      method: "POST",
      body: JSON.stringify({ prompt }),
    });
  }

  dispatch(
    sessionId: string,
    maskHash: string,
    edits: MentionEdit[],
  ): Promise<DispatchResponse> {
    return request<DispatchResponse>(this.url(`/v1/sessions/${sessionId}/dispatch`), {
      method: "POST",
      body: JSON.stringify({ mask_hash: maskHash, edits }),
    });
  }

  vault(sessionId: string): Promise<VaultSnapshot> {
    return request<VaultSnapshot>(this.url(`/v1/sessions/${sessionId}/vault`));
  }

  async transcript(sessionId: string): Promise<TranscriptRecord[]> {
    const body = await request<{ records: TranscriptRecord[] }>(
      this.url(`/v1/sessions/${sessionId}/transcript`),
    );
    return body.records;
  }
}
