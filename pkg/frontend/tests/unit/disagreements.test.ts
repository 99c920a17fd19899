import { afterEach, describe, expect, it } from 'vitest';

import { ApiClient } from '../../src/api.js';
import { createDisagreementView, unionOfCoderSets } from '../../src/disagreements.js';
import type { Disagreement } from '../../src/types.js';
import {
  FetchCall, installFetchStub, jsonResponse, miniTaxonomy, waitFor,
} from '../helpers.js';

interface FakeBackend {
  disagreements: Disagreement[];
  resolutionResponse?: (call: FetchCall) => Response;
  irrResponse?: () => Response;
  goldResponse?: (call: FetchCall) => Response;
}

function route(backend: FakeBackend, call: FetchCall): Response {
  if (call.url.includes('/resolutions')) {
    if (backend.resolutionResponse) return backend.resolutionResponse(call);
    const body = call.body as {
      issue_key: string; method: 'combined' | 'reclassified'; final_labels?: string[];
    };
    const item = backend.disagreements.find((d) => d.issue_key === body.issue_key)!;
    item.status = 'resolved';
    const final = body.final_labels ?? unionOfCoderSets(item);
    return jsonResponse({
      issue_key: body.issue_key, final_labels: final, method: body.method, notes: '',
    }, 201);
  }
  if (call.url.includes('/irr')) {
    if (backend.irrResponse) return backend.irrResponse();
    return jsonResponse({
      metric: 'krippendorff_alpha', value: 0.75, n_items: 3,
      n_coders: 2, distance: 'masi', excluded_items: 0,
    });
  }
  if (call.url.includes('/gold')) {
    if (backend.goldResponse) return backend.goldResponse(call);
    return jsonResponse({ name: 'gold', entries: { 'synth:1': ['R1'] } }, 201);
  }
  if (call.url.includes('/disagreements')) {
    return jsonResponse({ disagreements: backend.disagreements });
  }
  throw new Error(`unrouted call: ${call.method} ${call.url}`);
}

let restore: (() => void) | null = null;

afterEach(() => {
  restore?.();
  restore = null;
  document.body.textContent = '';
});

async function mountView(backend: FakeBackend) {
  const stub = installFetchStub((call) => route(backend, call));
  restore = stub.restore;
  const view = createDisagreementView(new ApiClient(), miniTaxonomy(), 's1');
  document.body.appendChild(view.element);
  await view.refresh();
  return { view, calls: stub.calls };
}

function twoOpen(): Disagreement[] {
  return [
    { issue_key: 'synth:1', by_coder: { maya: ['R1', 'R2'], iris: ['R1'] }, status: 'open' },
    { issue_key: 'synth:2', by_coder: { maya: ['R10'], iris: ['R11'] }, status: 'open' },
  ];
}

describe('unionOfCoderSets', () => {
  it('unions every coder set in requirement order', () => {
    expect(unionOfCoderSets(twoOpen()[0]!)).toEqual(['R1', 'R2']);
    expect(unionOfCoderSets({
      issue_key: 'x', by_coder: { a: ['R10'], b: ['R2'], c: [] }, status: 'open',
    })).toEqual(['R2', 'R10']);
  });
});

describe('createDisagreementView', () => {
  it('lists open items with each coder set side by side', async () => {
    const { view } = await mountView({ disagreements: twoOpen() });
    const entries = [...view.element.querySelectorAll('.open-list .disagreement')];
    expect(entries.map((e) => (e as HTMLElement).dataset.issueKey))
      .toEqual(['synth:1', 'synth:2']);
    const rows = entries[0]!.querySelectorAll('.coder-sets tr');
    expect([...rows].map((r) => r.textContent)).toEqual(['mayaR1, R2', 'irisR1']);
    expect(view.element.querySelector('.irr')!.textContent)
      .toBe('krippendorff_alpha (masi): 0.7500 over 3 items, 2 coders');
  });

  it('renders an empty coder set visibly', async () => {
    const { view } = await mountView({
      disagreements: [
        { issue_key: 'synth:3', by_coder: { maya: [], iris: ['R1'] }, status: 'open' },
      ],
    });
    expect(view.element.querySelector('.coder-sets')!.textContent).toContain('(empty)');
  });

  it('combines with the union and moves the item to resolved', async () => {
    const backend: FakeBackend = { disagreements: twoOpen() };
    const { view, calls } = await mountView(backend);
    const first = view.element.querySelector('.open-list .disagreement')!;
    const combine = first.querySelector('button.combine') as HTMLButtonElement;
    expect(combine.textContent).toBe('Combine as {R1, R2}');
    combine.click();
    await waitFor(
      () => view.element.querySelectorAll('.done-list .disagreement').length === 1,
      'item to move to resolved',
    );
    const post = calls.find((c) => c.method === 'POST')!;
    // the server computes the union; the client only previews it
    expect(post.body).toEqual({ issue_key: 'synth:1', method: 'combined' });
    expect(view.element.querySelector('.done-list .disagreement')!.textContent)
      .toBe('synth:1 (resolved)');
  });

  it('reclassifies through a fresh picker', async () => {
    const backend: FakeBackend = { disagreements: twoOpen() };
    const { view, calls } = await mountView(backend);
    const second = [...view.element.querySelectorAll('.open-list .disagreement')][1]!;
    (second.querySelector('button.reclassify') as HTMLButtonElement).click();
    const editor = second.querySelector('.reclassify-editor') as HTMLElement;
    expect(editor.hidden).toBe(false);
    const fresh = [...editor.querySelectorAll('input[type=checkbox]')]
      .filter((b) => (b as HTMLInputElement).checked);
    expect(fresh.length).toBe(0);
    const box = [...editor.querySelectorAll('input[type=checkbox]')]
      .find((b) => (b as HTMLInputElement).value === 'R2') as HTMLInputElement;
    box.checked = true;
    box.dispatchEvent(new Event('change'));
    (editor.querySelector('button.confirm-reclassify') as HTMLButtonElement).click();
    await waitFor(
      () => view.element.querySelectorAll('.done-list .disagreement').length === 1,
      'reclassified item to resolve',
    );
    const post = calls.find((c) => c.method === 'POST')!;
    expect(post.body).toEqual({
      issue_key: 'synth:2', method: 'reclassified', final_labels: ['R2'],
    });
  });

  it('enables gold export only when nothing is open', async () => {
    const backend: FakeBackend = { disagreements: twoOpen() };
    const { view } = await mountView(backend);
    const exportButton = view.element.querySelector('.export-gold') as HTMLButtonElement;
    expect(exportButton.disabled).toBe(true);

    (view.element.querySelector('button.combine') as HTMLButtonElement).click();
    await waitFor(
      () => view.element.querySelectorAll('.done-list .disagreement').length === 1,
      'first resolution',
    );
    expect(exportButton.disabled).toBe(true);

    (view.element.querySelector('button.combine') as HTMLButtonElement).click();
    await waitFor(
      () => view.element.querySelectorAll('.done-list .disagreement').length === 2,
      'second resolution',
    );
    expect(exportButton.disabled).toBe(false);

    exportButton.click();
    await waitFor(
      () => view.element.querySelector('.export-status')!.textContent !== '',
      'export confirmation',
    );
    expect(view.element.querySelector('.export-status')!.textContent)
      .toBe("Exported 'gold' with 1 issues.");
  });

  it('shows a conflict notice instead of writing when the item was already resolved', async () => {
    const backend: FakeBackend = { disagreements: twoOpen() };
    const { view, calls } = await mountView(backend);
    // another coder resolves synth:1 behind this view's back
    backend.disagreements[0]!.status = 'resolved';
    (view.element.querySelector('button.combine') as HTMLButtonElement).click();
    await waitFor(
      () => !view.element.querySelector<HTMLElement>('.banner')!.hidden,
      'conflict notice',
    );
    expect(view.element.querySelector('.banner')!.textContent)
      .toBe('synth:1 was already resolved; list refreshed.');
    expect(calls.some((c) => c.method === 'POST')).toBe(false);
    // the list re-rendered from the fresh server state
    expect(view.element.querySelectorAll('.done-list .disagreement').length).toBe(1);
  });

  it('reports agreement as unavailable when the server cannot compute it', async () => {
    const { view } = await mountView({
      disagreements: twoOpen(),
      irrResponse: () =>
        jsonResponse({ code: 'no_variation', message: 'all identical' }, 422),
    });
    expect(view.element.querySelector('.irr')!.textContent)
      .toBe('agreement unavailable: no_variation');
  });

  it('says so when no disagreements are open', async () => {
    const { view } = await mountView({
      disagreements: [
        { issue_key: 'synth:1', by_coder: { maya: ['R1'], iris: ['R2'] }, status: 'resolved' },
      ],
    });
    expect(view.element.querySelector('.none-open')!.textContent)
      .toBe('No open disagreements.');
    expect((view.element.querySelector('.export-gold') as HTMLButtonElement).disabled)
      .toBe(false);
  });
});
