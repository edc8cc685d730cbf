/** In-memory stand-in for the recourse service, for unit tests.
 *
 * Mimics the 1-D walk task: wealth moves one unit toward 1.5 per applied
 * step, age is immutable, confidence is a simple logistic in wealth with the
 * positive label at confidence >= 0.7.
 */

import type { FetchLike } from '../src/api.js';
import type { DirectionCard, Meta, RawRecord, SessionStatus, TimelineEntry } from '../src/types.js';

export const MOCK_META: Meta = {
    schema: {
        features: [
            { name: 'wealth', kind: 'continuous', mutability: 'free' },
            { name: 'age', kind: 'continuous', mutability: 'immutable' },
            { name: 'plan', kind: 'categorical', mutability: 'free', categories: ['basic', 'gold'] },
        ],
    },
    k: 1,
    threshold: 0.7,
    step_size: 1.0,
};

function confidenceOf(wealth: number): number {
    return 1 / (1 + Math.exp(-(10 * wealth - 10 + Math.log(0.7 / 0.3))));
}

interface MockSession {
    features: RawRecord;
    status: SessionStatus;
    history: TimelineEntry[];
}

export class MockServer {
    sessions = new Map<string, MockSession>();
    requests: string[] = [];
    private counter = 0;

    fetch: FetchLike = async (input, init) => {
        const method = init?.method ?? 'GET';
        const url = input.replace(/^https?:\/\/[^/]+/, '');
        this.requests.push(`${method} ${url}`);
        const body = init?.body ? JSON.parse(String(init.body)) : undefined;
        return this.route(method, url, body);
    };

    private json(status: number, payload: unknown): Response {
        return new Response(JSON.stringify(payload), {
            status,
            headers: { 'content-type': 'application/json' },
        });
    }

    private classification(features: RawRecord) {
        const confidence = confidenceOf(Number(features['wealth']));
        return { confidence, label: confidence >= 0.7 ? 1 : -1 };
    }

    private route(method: string, url: string, body: RawRecord | undefined): Response {
        if (method === 'GET' && url === '/api/meta') {
            return this.json(200, MOCK_META);
        }
        if (method === 'POST' && url === '/api/session') {
            const record = body ?? {};
            if (typeof record['wealth'] !== 'number') {
                return this.json(400, { error: "feature 'wealth' must be numeric" });
            }
            if (record['plan'] !== 'basic' && record['plan'] !== 'gold') {
                return this.json(422, { error: `unknown category ${String(record['plan'])}` });
            }
            const { confidence, label } = this.classification(record);
            const id = `session-${this.counter++}`;
            const status: SessionStatus = label === 1 ? 'succeeded' : 'seeking';
            this.sessions.set(id, {
                features: { ...record },
                status,
                history: [{ features: { ...record }, confidence, choice: 'initial' }],
            });
            return this.json(201, { id, label, confidence, status });
        }

        const match = url.match(/^\/api\/session\/([^/]+)(\/directions|\/step)?$/);
        if (!match) {
            return this.json(404, { error: 'no such route' });
        }
        const session = this.sessions.get(match[1] ?? '');
        if (!session) {
            return this.json(404, { error: 'unknown session' });
        }

        if (match[2] === '/directions' && method === 'GET') {
            if (session.status === 'succeeded') {
                return this.json(409, { error: 'session already succeeded' });
            }
            const wealth = Number(session.features['wealth']);
            const nextWealth = wealth + 1;
            const card: DirectionCard = {
                cluster: 0,
                empty: false,
                vector: [1, 0, 0, 0],
                deltas: {
                    wealth: { from: wealth, to: nextWealth, delta: 1 },
                    age: { from: session.features['age'] ?? 0, to: session.features['age'] ?? 0, delta: 0 },
                    plan: { from: 'basic', to: 'basic', delta: 0 },
                },
                next_confidence: confidenceOf(nextWealth),
            };
            return this.json(200, { directions: [card] });
        }

        if (match[2] === '/step' && method === 'POST') {
            if (session.status === 'succeeded') {
                return this.json(409, { error: 'session already succeeded' });
            }
            const features = { ...session.features };
            let choice: number | 'manual';
            if (body && 'cluster_id' in body) {
                features['wealth'] = Number(features['wealth']) + 1;
                choice = 0;
            } else if (body && 'manual_deltas' in body) {
                const deltas = body['manual_deltas'] as unknown as RawRecord;
                if ('age' in deltas && Number(deltas['age']) !== 0) {
                    return this.json(400, { error: "feature 'age' is immutable and cannot be changed" });
                }
                features['wealth'] = Number(features['wealth']) + Number(deltas['wealth'] ?? 0);
                choice = 'manual';
            } else {
                return this.json(400, { error: 'provide exactly one of cluster_id or manual_deltas' });
            }
            const { confidence, label } = this.classification(features);
            session.features = features;
            session.status = label === 1 ? 'succeeded' : 'seeking';
            session.history.push({ features: { ...features }, confidence, choice });
            return this.json(200, { features, label, confidence, status: session.status });
        }

        if (!match[2] && method === 'GET') {
            const { confidence, label } = this.classification(session.features);
            return this.json(200, {
                id: match[1],
                status: session.status,
                label,
                confidence,
                features: session.features,
                history: session.history,
            });
        }
        return this.json(404, { error: 'no such route' });
    }
}
