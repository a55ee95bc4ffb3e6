// Thin typed client of the annotation HTTP API.  The server owns all
// staging rules; this client never caches reveal data and surfaces the
// server's status codes so blinding violations stay visible.

import type {
  EventList,
  EventSummary,
  ReplayPayload,
  RevealPayload,
  Stage1Body,
  Stage2Body,
  StageState,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
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
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listEvents(): Promise<EventSummary[]> {
    const body = await request<EventList>(this.url('/api/events'));
    return body.events;
  }

  getReplay(eventId: string): Promise<ReplayPayload> {
    return request(this.url(`/api/events/${eventId}/replay`));
  }

  getState(eventId: string, rater: string): Promise<StageState> {
    return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/state`));
  }

  submitStage1(eventId: string, rater: string, body: Stage1Body): Promise<unknown> {
    return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/stage1`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  getReveal(eventId: string, rater: string): Promise<RevealPayload> {
    return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/reveal`));
  }

  submitStage2(eventId: string, rater: string, body: Stage2Body): Promise<unknown> {
    return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/stage2`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }
}
