/** Client-side session state: a thin mirror of the server, never a recomputation.
 *
 * Confidence numbers in the timeline are stored verbatim from server
 * responses. Guards enforce that no step or direction request is issued after
 * the session has succeeded and that at most one step request is in flight.
 */

import { ApiError, RecourseApi } from './api.js';
import type {
    DirectionCard,
    RawRecord,
    SessionStatus,
    StepChoice,
    TimelineEntry,
} from './types.js';

export class SessionController {
    sessionId: string | null = null;
    status: SessionStatus = 'seeking';
    confidence = 0;
    label = -1;
    features: RawRecord = {};
    timeline: TimelineEntry[] = [];
    directions: DirectionCard[] = [];
    pending = false;
    lastError: string | null = null;

    constructor(private readonly api: RecourseApi) {}

    get succeeded(): boolean {
        return this.status === 'succeeded';
    }

    async create(record: RawRecord): Promise<boolean> {
        this.lastError = null;
        try {
            const created = await this.api.createSession(record);
            this.sessionId = created.id;
            this.status = created.status;
            this.confidence = created.confidence;
            this.label = created.label;
            this.features = { ...record };
            this.timeline = [
                { features: { ...record }, confidence: created.confidence, choice: 'initial' },
            ];
            if (!this.succeeded) {
                await this.refreshDirections();
            }
            return true;
        } catch (err) {
            this.recordError(err);
            return false;
        }
    }

    async refreshDirections(): Promise<void> {
        if (!this.sessionId || this.succeeded) {
            return;
        }
        try {
            const payload = await this.api.directions(this.sessionId);
            this.directions = payload.directions;
        } catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                // The server already considers the session successful.
                this.status = 'succeeded';
                return;
            }
            this.recordError(err);
        }
    }

    applyCluster(clusterId: number): Promise<boolean> {
        return this.step({ cluster_id: clusterId }, clusterId);
    }

    applyManual(deltas: RawRecord): Promise<boolean> {
        return this.step({ manual_deltas: deltas }, 'manual');
    }

    private async step(choice: StepChoice, tag: number | 'manual'): Promise<boolean> {
        if (!this.sessionId || this.succeeded || this.pending) {
            return false;
        }
        this.pending = true;
        this.lastError = null;
        try {
            const stepped = await this.api.step(this.sessionId, choice);
            this.features = stepped.features;
            this.confidence = stepped.confidence;
            this.label = stepped.label;
            this.status = stepped.status;
            this.timeline = [
                ...this.timeline,
                { features: stepped.features, confidence: stepped.confidence, choice: tag },
            ];
            if (!this.succeeded) {
                await this.refreshDirections();
            }
            return true;
        } catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                this.status = 'succeeded';
            } else {
                this.recordError(err);
            }
            return false;
        } finally {
            this.pending = false;
        }
    }

    private recordError(err: unknown): void {
        this.lastError = err instanceof Error ? err.message : String(err);
    }
}
