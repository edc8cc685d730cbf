/** Pure HTML renderers; all numbers shown come straight from the server. */

import type {
    DirectionCard,
    FeatureSpec,
    Meta,
    SessionStatus,
    TimelineEntry,
} from './types.js';

function esc(value: unknown): string {
    return String(value)
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}

function fieldInput(feature: FeatureSpec): string {
    if (feature.kind === 'continuous') {
        return `<input type="number" step="any" name="${esc(feature.name)}" data-kind="continuous" required>`;
    }
    const options = (feature.kind === 'ordinal' ? feature.levels : feature.categories) ?? [];
    const kind = feature.kind;
    const rendered = options
        .map((option) => `<option value="${esc(option)}">${esc(option)}</option>`)
        .join('');
    return `<select name="${esc(feature.name)}" data-kind="${kind}">${rendered}</select>`;
}

export function renderProfileForm(meta: Meta): string {
    const rows = meta.schema.features
        .map((feature) => {
            const badge =
                feature.mutability === 'free'
                    ? ''
                    : ` <span class="badge">${esc(feature.mutability)}</span>`;
            return `<label class="field">${esc(feature.name)}${badge}${fieldInput(feature)}</label>`;
        })
        .join('\n');
    return `<form id="profile-form">\n${rows}\n<button type="submit">Start session</button>\n</form>`;
}

function formatDelta(value: number): string {
    const sign = value > 0 ? '+' : '';
    return `${sign}${Number(value.toFixed(4))}`;
}

export function renderDirectionCards(cards: DirectionCard[], meta: Meta): string {
    const mutability = new Map(meta.schema.features.map((f) => [f.name, f.mutability]));
    const rendered = cards.map((card) => {
        if (card.empty) {
            return (
                `<article class="direction empty" data-cluster="${card.cluster}">` +
                `<h3>Option ${card.cluster + 1}</h3>` +
                `<p>No recourse available from this cluster.</p>` +
                `<button disabled>Apply</button></article>`
            );
        }
        const deltas = Object.entries(card.deltas)
            .filter(([, entry]) => entry.delta !== 0)
            .sort((a, b) => Math.abs(b[1].delta) - Math.abs(a[1].delta))
            .map(([name, entry]) => {
                const detail =
                    typeof entry.from === 'number'
                        ? formatDelta(entry.delta)
                        : `${esc(entry.from)} → ${esc(entry.to)}`;
                return `<li class="delta">${esc(name)}: ${detail}</li>`;
            })
            .join('');
        const locked = Object.entries(card.deltas)
            .filter(([name, entry]) => entry.delta === 0 && mutability.get(name) === 'immutable')
            .map(([name]) => `<li class="delta locked">${esc(name)}: unchanged</li>`)
            .join('');
        const confidence =
            card.next_confidence === undefined
                ? ''
                : `<p class="next-confidence">next confidence: ${card.next_confidence}</p>`;
        return (
            `<article class="direction" data-cluster="${card.cluster}">` +
            `<h3>Option ${card.cluster + 1}</h3>` +
            `<ul>${deltas}${locked}</ul>${confidence}` +
            `<button data-apply="${card.cluster}">Apply</button></article>`
        );
    });
    return rendered.join('\n');
}

export function renderTimeline(entries: TimelineEntry[]): string {
    const items = entries
        .map((entry, index) => {
            const tag = entry.choice === 'initial' ? 'start' : entry.choice === 'manual' ? 'manual' : `option ${Number(entry.choice) + 1}`;
            return `<li class="timeline-entry" data-step="${index}"><span class="tag">${esc(tag)}</span> confidence ${entry.confidence}</li>`;
        })
        .join('\n');
    return `<ol class="timeline">${items}</ol>`;
}

export function renderGauge(confidence: number, threshold: number): string {
    const percent = Math.round(confidence * 100);
    return (
        `<div class="gauge"><div class="gauge-fill" style="width:${percent}%"></div>` +
        `<div class="gauge-threshold" style="left:${Math.round(threshold * 100)}%"></div>` +
        `<span class="gauge-label">${confidence}</span></div>`
    );
}

export function renderStatusBanner(status: SessionStatus, error: string | null): string {
    if (error) {
        return `<div class="banner error">${esc(error)}</div>`;
    }
    if (status === 'succeeded') {
        return `<div class="banner success">Positive outcome reached.</div>`;
    }
    return '';
}
