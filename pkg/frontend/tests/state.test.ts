import { describe, expect, it } from 'vitest';

import { RecourseApi } from '../src/api.js';
import { SessionController } from '../src/state.js';
import { MockServer } from './mock_server.js';

const RECORD = { wealth: -0.5, age: 30, plan: 'basic' };

function controllerWithServer() {
    const server = new MockServer();
    const controller = new SessionController(new RecourseApi('', server.fetch));
    return { server, controller };
}

describe('SessionController', () => {
    it('creates a session, loads directions, and walks to success', async () => {
        const { controller } = controllerWithServer();
        expect(await controller.create(RECORD)).toBe(true);
        expect(controller.status).toBe('seeking');
        expect(controller.directions).toHaveLength(1);
        expect(controller.timeline).toHaveLength(1);

        while (!controller.succeeded) {
            expect(await controller.applyCluster(0)).toBe(true);
        }
        // wealth -0.5 -> 0.5 -> 1.5: two steps, three timeline entries
        expect(controller.timeline).toHaveLength(3);
        expect(controller.confidence).toBeGreaterThanOrEqual(0.7);
    });

    it('timeline confidences are the server values verbatim', async () => {
        const { server, controller } = controllerWithServer();
        await controller.create(RECORD);
        await controller.applyCluster(0);
        await controller.applyCluster(0);
        const serverSession = [...server.sessions.values()][0]!;
        expect(controller.timeline.map((t) => t.confidence)).toEqual(
            serverSession.history.map((t) => t.confidence),
        );
    });

    it('never issues a step request after success', async () => {
        const { server, controller } = controllerWithServer();
        await controller.create(RECORD);
        while (!controller.succeeded) {
            await controller.applyCluster(0);
        }
        const requestsAtSuccess = server.requests.filter((r) => r.includes('/step')).length;
        expect(await controller.applyCluster(0)).toBe(false);
        expect(await controller.applyManual({ wealth: 1 })).toBe(false);
        const requestsAfter = server.requests.filter((r) => r.includes('/step')).length;
        expect(requestsAfter).toBe(requestsAtSuccess);
    });

    it('allows a single in-flight step request', async () => {
        const { server, controller } = controllerWithServer();
        await controller.create(RECORD);
        const first = controller.applyCluster(0);
        const second = controller.applyCluster(0); // fired while pending
        const results = await Promise.all([first, second]);
        expect(results).toEqual([true, false]);
        const stepRequests = server.requests.filter((r) => r.includes('/step')).length;
        expect(stepRequests).toBe(1);
        expect(controller.timeline).toHaveLength(2);
    });

    it('tags manual deviations in the timeline', async () => {
        const { controller } = controllerWithServer();
        await controller.create(RECORD);
        await controller.applyManual({ wealth: 0.25 });
        expect(controller.timeline.at(-1)?.choice).toBe('manual');
        expect(controller.features['wealth']).toBeCloseTo(-0.25, 12);
    });

    it('surfaces server 400 on immutable-feature edits without touching the timeline', async () => {
        const { controller } = controllerWithServer();
        await controller.create(RECORD);
        const before = controller.timeline.length;
        expect(await controller.applyManual({ age: 5 })).toBe(false);
        expect(controller.lastError).toContain('age');
        expect(controller.timeline).toHaveLength(before);
        expect(controller.status).toBe('seeking');
    });

    it('records creation errors instead of throwing', async () => {
        const { controller } = controllerWithServer();
        expect(await controller.create({ ...RECORD, plan: 'platinum' })).toBe(false);
        expect(controller.lastError).toContain('platinum');
        expect(controller.sessionId).toBeNull();
    });

    it('treats a 409 from the server as success', async () => {
        const { server, controller } = controllerWithServer();
        await controller.create(RECORD);
        // flip the session to succeeded behind the controller's back
        const session = [...server.sessions.values()][0]!;
        session.status = 'succeeded';
        expect(await controller.applyCluster(0)).toBe(false);
        expect(controller.succeeded).toBe(true);
        expect(controller.lastError).toBeNull();
    });
});
