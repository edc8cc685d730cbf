/** Browser entry: wires the controller and renderers to the page. */

import { RecourseApi } from './api.js';
import {
    renderDirectionCards,
    renderGauge,
    renderProfileForm,
    renderStatusBanner,
    renderTimeline,
} from './render.js';
import { SessionController } from './state.js';
import type { Meta, RawRecord } from './types.js';

const api = new RecourseApi('');
const controller = new SessionController(api);
let meta: Meta;

function el(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (!node) {
        throw new Error(`missing element #${id}`);
    }
    return node;
}

function readForm(form: HTMLFormElement): RawRecord {
    const record: RawRecord = {};
    for (const feature of meta.schema.features) {
        const input = form.elements.namedItem(feature.name) as HTMLInputElement | HTMLSelectElement;
        record[feature.name] = feature.kind === 'continuous' ? Number(input.value) : input.value;
    }
    return record;
}

function redraw(): void {
    el('banner').innerHTML = renderStatusBanner(controller.status, controller.lastError);
    el('gauge').innerHTML = renderGauge(controller.confidence, meta.threshold);
    el('timeline').innerHTML = renderTimeline(controller.timeline);
    el('directions').innerHTML = controller.succeeded
        ? ''
        : renderDirectionCards(controller.directions, meta);
    for (const button of el('directions').querySelectorAll('button[data-apply]')) {
        (button as HTMLButtonElement).disabled = controller.pending || controller.succeeded;
        button.addEventListener('click', async () => {
            await controller.applyCluster(Number(button.getAttribute('data-apply')));
            redraw();
        });
    }
}

async function onManualSubmit(event: Event): Promise<void> {
    event.preventDefault();
    const form = event.currentTarget as HTMLFormElement;
    const name = (form.elements.namedItem('feature') as HTMLSelectElement).value;
    const rawValue = (form.elements.namedItem('value') as HTMLInputElement).value;
    const spec = meta.schema.features.find((f) => f.name === name);
    const value = spec?.kind === 'categorical' ? rawValue : Number(rawValue);
    await controller.applyManual({ [name]: value });
    redraw();
}

async function onProfileSubmit(event: Event): Promise<void> {
    event.preventDefault();
    const ok = await controller.create(readForm(event.currentTarget as HTMLFormElement));
    if (ok) {
        el('setup').hidden = true;
        el('session').hidden = false;
    }
    redraw();
}

async function boot(): Promise<void> {
    meta = await api.meta();
    el('profile').innerHTML = renderProfileForm(meta);
    el('profile-form').addEventListener('submit', onProfileSubmit);
    const manualSelect = el('manual-feature') as unknown as HTMLSelectElement;
    manualSelect.innerHTML = meta.schema.features
        .map((f) => `<option value="${f.name}">${f.name}</option>`)
        .join('');
    el('manual-form').addEventListener('submit', onManualSubmit);
}

void boot();
