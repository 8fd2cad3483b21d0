// HTTP client for one live session. The client never mutates evaluation
// state except through POST /action and POST /reset; everything it shows
// comes back from the server.

import type { NormalizedAction, RunReply, SnapshotDoc, StepEvent, StepResult } from './protocol.js';

export class ServerRejection extends Error {
  constructor(readonly status: number, readonly body: Record<string, unknown>) {
    super(`server rejected request (${status}): ${JSON.stringify(body)}`);
  }
}

export class SessionClient {
  constructor(readonly baseUrl: string) {}

  async getState(): Promise<SnapshotDoc> {
    return this.getJson('/state') as Promise<SnapshotDoc>;
  }

  async getRun(): Promise<RunReply> {
    return this.getJson('/run') as Promise<RunReply>;
  }

  async getObservationText(): Promise<string> {
    const res = await fetch(`${this.baseUrl}/observation.txt`);
    return res.text();
  }

  async getObservationFrame(): Promise<Uint8Array> {
    const res = await fetch(`${this.baseUrl}/observation.ppm`);
    return new Uint8Array(await res.arrayBuffer());
  }

  async submitAction(action: NormalizedAction): Promise<StepResult> {
    return this.postJson('/action', action) as Promise<StepResult>;
  }

  async reset(): Promise<StepResult> {
    return this.postJson('/reset', {}) as Promise<StepResult>;
  }

  private async getJson(path: string): Promise<unknown> {
    const res = await fetch(`${this.baseUrl}${path}`);
    const body = await res.json();
    if (!res.ok) throw new ServerRejection(res.status, body);
    return body;
  }

  private async postJson(path: string, payload: unknown): Promise<unknown> {
    const res = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    const body = await res.json();
    if (!res.ok) throw new ServerRejection(res.status, body);
    return body;
  }

  /**
   * Subscribe to GET /events (SSE). Returns a disposer. Implemented over
   * fetch streaming so the same code runs in browsers and in node.
   */
  subscribeEvents(
    onEvent: (event: StepEvent) => void,
    onError?: (err: unknown) => void,
  ): () => void {
    const controller = new AbortController();
    (async () => {
      try {
        const res = await fetch(`${this.baseUrl}/events`, { signal: controller.signal });
        if (!res.body) throw new Error('event stream has no body');
        const reader = res.body.getReader();
        const decoder = new TextDecoder();
        let buffer = '';
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let boundary = buffer.indexOf('\n\n');
          while (boundary >= 0) {
            const chunk = buffer.slice(0, boundary);
            buffer = buffer.slice(boundary + 2);
            for (const line of chunk.split('\n')) {
              if (line.startsWith('data: ')) {
                onEvent(JSON.parse(line.slice(6)) as StepEvent);
              }
            }
            boundary = buffer.indexOf('\n\n');
          }
        }
      } catch (err) {
        if (!controller.signal.aborted && onError) onError(err);
      }
    })();
    return () => controller.abort();
  }
}
