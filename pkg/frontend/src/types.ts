/** Payload shapes of the recourse service JSON API. */

export type FeatureKind = 'continuous' | 'ordinal' | 'categorical';
export type Mutability = 'free' | 'immutable' | 'increase_only';
export type SessionStatus = 'seeking' | 'succeeded';

export interface FeatureSpec {
    name: string;
    kind: FeatureKind;
    mutability: Mutability;
    levels?: string[];
    categories?: string[];
    scale_mean?: number;
    scale_std?: number;
}

export interface Meta {
    schema: { features: FeatureSpec[] };
    k: number;
    threshold: number;
    step_size: number;
}

export type RawRecord = Record<string, number | string>;

export interface CreateSessionResponse {
    id: string;
    label: number;
    confidence: number;
    status: SessionStatus;
}

export interface DeltaEntry {
    from: number | string;
    to: number | string;
    delta: number;
}

export interface DirectionCard {
    cluster: number;
    empty: boolean;
    vector: number[];
    deltas: Record<string, DeltaEntry>;
    next_confidence?: number;
    next_label?: number;
}

export interface DirectionsResponse {
    directions: DirectionCard[];
}

export type StepChoice = { cluster_id: number } | { manual_deltas: RawRecord };

export interface StepResponse {
    features: RawRecord;
    label: number;
    confidence: number;
    status: SessionStatus;
}

export interface TimelineEntry {
    features: RawRecord;
    confidence: number;
    choice: number | 'manual' | 'initial';
}

export interface SessionView {
    id: string;
    status: SessionStatus;
    label: number;
    confidence: number;
    features: RawRecord;
    history: TimelineEntry[];
}
