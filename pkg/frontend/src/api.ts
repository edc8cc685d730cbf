/** Thin typed client for the recourse service; fetch is injectable for tests. */

import type {
    CreateSessionResponse,
    DirectionsResponse,
    Meta,
    RawRecord,
    SessionView,
    StepChoice,
    StepResponse,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        message: string,
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

async function parse<T>(response: Response): Promise<T> {
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
        const message =
            typeof (body as { error?: unknown }).error === 'string'
                ? (body as { error: string }).error
                : `request failed with status ${response.status}`;
        throw new ApiError(response.status, message);
    }
    return body as T;
}

export class RecourseApi {
    constructor(
        private readonly baseUrl: string = '',
        private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    ) {}

    meta(): Promise<Meta> {
        return this.request<Meta>('GET', '/api/meta');
    }

    createSession(record: RawRecord): Promise<CreateSessionResponse> {
        return this.request<CreateSessionResponse>('POST', '/api/session', record);
    }

    session(id: string): Promise<SessionView> {
        return this.request<SessionView>('GET', `/api/session/${id}`);
    }

    directions(id: string): Promise<DirectionsResponse> {
        return this.request<DirectionsResponse>('GET', `/api/session/${id}/directions`);
    }

    step(id: string, choice: StepChoice): Promise<StepResponse> {
        return this.request<StepResponse>('POST', `/api/session/${id}/step`, choice);
    }

    private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
        const init: RequestInit = { method, headers: { 'content-type': 'application/json' } };
        if (body !== undefined) {
            init.body = JSON.stringify(body);
        }
        return parse<T>(await this.fetchImpl(this.baseUrl + path, init));
    }
}
