/** Thin typed client over the causalwhy HTTP API. */

import type { GraphJson, UploadResponse, WhyRequest, WhyResponse } from './types.js';

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function handle<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === 'string') detail = body.detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = '') {}

  async health(): Promise<{ status: string }> {
    return handle(await fetch(`${this.base}/v1/health`));
  }

  /** Upload a CSV; the server replies with the session id and schema. */
  async uploadCsv(name: string, content: Blob | string): Promise<UploadResponse> {
    const form = new FormData();
    const blob = typeof content === 'string' ? new Blob([content], { type: 'text/csv' }) : content;
    form.append('file', blob, name);
    return handle(await fetch(`${this.base}/v1/datasets`, { method: 'POST', body: form }));
  }

  async learn(id: string, config: Record<string, number> = {}): Promise<GraphJson> {
    return handle(
      await fetch(`${this.base}/v1/datasets/${id}/learn`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(config),
      }),
    );
  }

  async graph(id: string): Promise<GraphJson> {
    return handle(await fetch(`${this.base}/v1/datasets/${id}/graph`));
  }

  async why(id: string, query: WhyRequest): Promise<WhyResponse> {
    return handle(
      await fetch(`${this.base}/v1/datasets/${id}/why`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify(query),
      }),
    );
  }
}
