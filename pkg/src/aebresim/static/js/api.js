// Thin typed client of the annotation HTTP API.  The server owns all
// staging rules; this client never caches reveal data and surfaces the
// server's status codes so blinding violations stay visible.
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
        this.name = 'ApiError';
    }
}
async function request(url, init) {
    const response = await fetch(url, init);
    if (!response.ok) {
        let detail = response.statusText;
        try {
            const body = await response.json();
            if (body && typeof body.detail === 'string')
                detail = body.detail;
        }
        catch {
            // non-JSON error body; keep the status text
        }
        throw new ApiError(response.status, detail);
    }
    return (await response.json());
}
export class ApiClient {
    baseUrl;
    constructor(baseUrl = '') {
        this.baseUrl = baseUrl;
    }
    url(path) {
        return `${this.baseUrl}${path}`;
    }
    async listEvents() {
        const body = await request(this.url('/api/events'));
        return body.events;
    }
    getReplay(eventId) {
        return request(this.url(`/api/events/${eventId}/replay`));
    }
    getState(eventId, rater) {
        return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/state`));
    }
    submitStage1(eventId, rater, body) {
        return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/stage1`), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
    }
    getReveal(eventId, rater) {
        return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/reveal`));
    }
    submitStage2(eventId, rater, body) {
        return request(this.url(`/api/events/${eventId}/raters/${encodeURIComponent(rater)}/stage2`), {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
    }
}
