// Thin typed client for the edit-session API. The fetch function is
// injectable so tests can run against canned responses.

import { ArtifactManifest, SessionHistory } from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }

  get retryable(): boolean {
    return this.status === 503;
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = '',
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(url: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + url, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async createSession(imageB64: string, sourceCaption: string): Promise<string> {
    const response = await this.request('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ image_b64: imageB64, source_caption: sourceCaption }),
    });
    return (await response.json()).id;
  }

  async postEdit(
    sessionId: string,
    targetCaption: string,
    config?: Record<string, unknown>,
  ): Promise<string> {
    const response = await this.request(`/sessions/${sessionId}/edits`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ target_caption: targetCaption, config }),
    });
    return (await response.json()).run_id;
  }

  async getHistory(sessionId: string): Promise<SessionHistory> {
    return (await this.request(`/sessions/${sessionId}`)).json();
  }

  async getArtifacts(sessionId: string, runId: string): Promise<ArtifactManifest> {
    return (await this.request(`/sessions/${sessionId}/runs/${runId}/artifacts`)).json();
  }

  async fetchJson<T>(url: string): Promise<T> {
    return (await this.request(url)).json();
  }

  async fetchBytes(url: string): Promise<Uint8Array> {
    const response = await this.request(url);
    return new Uint8Array(await response.arrayBuffer());
  }
}

export async function sha256Hex(bytes: Uint8Array): Promise<string> {
  const digest = await crypto.subtle.digest('SHA-256', bytes.slice().buffer);
  return Array.from(new Uint8Array(digest))
    .map((b) => b.toString(16).padStart(2, '0'))
    .join('');
}
