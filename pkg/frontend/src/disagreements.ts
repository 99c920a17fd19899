import { ApiClient, ApiError } from './api.js';
import { createLabelPicker, sortRequirementIds } from './picker.js';
import type { Disagreement, Taxonomy } from './types.js';

export interface DisagreementView {
  element: HTMLElement;
  refresh(): Promise<void>;
}

export function unionOfCoderSets(item: Disagreement): string[] {
  const union = new Set<string>();
  for (const labels of Object.values(item.by_coder)) {
    for (const label of labels) union.add(label);
  }
  return sortRequirementIds(union);
}

export function createDisagreementView(
  client: ApiClient,
  taxonomy: Taxonomy,
  sessionId: string,
): DisagreementView {
  const root = document.createElement('section');
  root.className = 'disagreements';

  const irrLine = document.createElement('div');
  irrLine.className = 'irr';
  root.appendChild(irrLine);

  const notice = document.createElement('div');
  notice.className = 'banner';
  notice.hidden = true;
  root.appendChild(notice);

  const openHeading = document.createElement('h2');
  openHeading.textContent = 'Open disagreements';
  root.appendChild(openHeading);
  const openList = document.createElement('ul');
  openList.className = 'open-list';
  root.appendChild(openList);

  const doneHeading = document.createElement('h2');
  doneHeading.textContent = 'Resolved';
  root.appendChild(doneHeading);
  const doneList = document.createElement('ul');
  doneList.className = 'done-list';
  root.appendChild(doneList);

  const exportRow = document.createElement('div');
  exportRow.className = 'export-row';
  const goldName = document.createElement('input');
  goldName.type = 'text';
  goldName.value = 'gold';
  goldName.setAttribute('aria-label', 'gold dataset name');
  const exportButton = document.createElement('button');
  exportButton.className = 'export-gold';
  exportButton.textContent = 'Export gold dataset';
  exportButton.disabled = true;
  const exportStatus = document.createElement('span');
  exportStatus.className = 'export-status';
  exportRow.appendChild(goldName);
  exportRow.appendChild(exportButton);
  exportRow.appendChild(exportStatus);
  root.appendChild(exportRow);

  let items: Disagreement[] = [];

  function showNotice(text: string): void {
    notice.hidden = false;
    notice.textContent = text;
  }

  async function renderIrr(): Promise<void> {
    try {
      const result = await client.irr(sessionId, 'alpha', 'masi');
      const tag = result.distance ? ` (${result.distance})` : '';
      irrLine.textContent =
        `${result.metric}${tag}: ${result.value.toFixed(4)} ` +
        `over ${result.n_items} items, ${result.n_coders} coders`;
    } catch (error) {
      irrLine.textContent = error instanceof ApiError
        ? `agreement unavailable: ${error.code}`
        : 'agreement unavailable';
    }
  }

  function coderTable(item: Disagreement): HTMLElement {
    const table = document.createElement('table');
    table.className = 'coder-sets';
    for (const [coder, labels] of Object.entries(item.by_coder)) {
      const row = document.createElement('tr');
      const who = document.createElement('th');
      who.textContent = coder;
      const what = document.createElement('td');
      what.textContent = labels.length ? labels.join(', ') : '(empty)';
      row.appendChild(who);
      row.appendChild(what);
      table.appendChild(row);
    }
    return table;
  }

  async function resolve(
    item: Disagreement,
    method: 'combined' | 'reclassified',
    finalLabels?: string[],
  ): Promise<void> {
    // someone may have resolved this while it was on screen; check the
    // server's current view before writing, per the refetch-on-conflict rule
    const fresh = await client.disagreements(sessionId);
    const current = fresh.disagreements.find((d) => d.issue_key === item.issue_key);
    if (current && current.status === 'resolved') {
      showNotice(`${item.issue_key} was already resolved; list refreshed.`);
      items = fresh.disagreements;
      renderLists();
      await renderIrr();
      return;
    }
    try {
      await client.postResolution(sessionId, item.issue_key, method, finalLabels);
      notice.hidden = true;
      await refresh();
    } catch (error) {
      if (error instanceof ApiError) {
        showNotice(`${error.code}: ${error.message}`);
        if (error.status === 409) await refresh();
      } else {
        showNotice('Network problem; nothing was saved.');
      }
    }
  }

  function openEntry(item: Disagreement): HTMLElement {
    const entry = document.createElement('li');
    entry.className = 'disagreement open';
    entry.dataset.issueKey = item.issue_key;

    const heading = document.createElement('h3');
    heading.textContent = item.issue_key;
    entry.appendChild(heading);
    entry.appendChild(coderTable(item));

    const actions = document.createElement('div');
    actions.className = 'actions';

    const combine = document.createElement('button');
    combine.className = 'combine';
    const union = unionOfCoderSets(item);
    combine.textContent = `Combine as {${union.join(', ')}}`;
    combine.addEventListener('click', () => void resolve(item, 'combined'));
    actions.appendChild(combine);

    const reclassify = document.createElement('button');
    reclassify.className = 'reclassify';
    reclassify.textContent = 'Reclassify';
    actions.appendChild(reclassify);
    entry.appendChild(actions);

    const editor = document.createElement('div');
    editor.className = 'reclassify-editor';
    editor.hidden = true;
    entry.appendChild(editor);

    reclassify.addEventListener('click', () => {
      if (!editor.hidden) return;
      editor.hidden = false;
      const picker = createLabelPicker(taxonomy);
      const confirm = document.createElement('button');
      confirm.className = 'confirm-reclassify';
      confirm.textContent = 'Save reclassification';
      confirm.addEventListener('click', () => {
        void resolve(item, 'reclassified', picker.getSelection());
      });
      editor.appendChild(picker.element);
      editor.appendChild(confirm);
    });

    return entry;
  }

  function doneEntry(item: Disagreement): HTMLElement {
    const entry = document.createElement('li');
    entry.className = 'disagreement resolved';
    entry.dataset.issueKey = item.issue_key;
    entry.textContent = `${item.issue_key} (resolved)`;
    return entry;
  }

  function renderLists(): void {
    openList.textContent = '';
    doneList.textContent = '';
    let open = 0;
    for (const item of items) {
      if (item.status === 'open') {
        open += 1;
        openList.appendChild(openEntry(item));
      } else {
        doneList.appendChild(doneEntry(item));
      }
    }
    if (open === 0) {
      const empty = document.createElement('li');
      empty.className = 'none-open';
      empty.textContent = 'No open disagreements.';
      openList.appendChild(empty);
    }
    exportButton.disabled = open > 0;
  }

  async function refresh(): Promise<void> {
    const payload = await client.disagreements(sessionId);
    items = payload.disagreements;
    renderLists();
    await renderIrr();
  }

  exportButton.addEventListener('click', async () => {
    exportButton.disabled = true;
    try {
      const gold = await client.exportGold(sessionId, goldName.value.trim() || 'gold');
      exportStatus.textContent =
        `Exported '${gold.name}' with ${Object.keys(gold.entries).length} issues.`;
      notice.hidden = true;
    } catch (error) {
      exportStatus.textContent = '';
      showNotice(error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : 'Network problem; nothing was exported.');
    } finally {
      exportButton.disabled = items.some((d) => d.status === 'open');
    }
  });

  return { element: root, refresh };
}
