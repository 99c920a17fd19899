import type { Requirement, Taxonomy } from './types.js';

export interface LabelPicker {
  element: HTMLElement;
  getSelection(): string[];
  setSelection(ids: string[]): void;
  clear(): void;
}

function numericId(rid: string): number {
  const tail = Number(rid.slice(1));
  return Number.isFinite(tail) ? tail : Number.MAX_SAFE_INTEGER;
}

export function sortRequirementIds(ids: Iterable<string>): string[] {
  return [...ids].sort((a, b) => numericId(a) - numericId(b) || a.localeCompare(b));
}

function matches(requirement: Requirement, needle: string): boolean {
  if (!needle) return true;
  const haystack = [
    requirement.id,
    requirement.text,
    ...requirement.keywords,
  ].join(' ').toLowerCase();
  return needle.split(/\s+/).every((part) => haystack.includes(part));
}

/**
 * Checkbox picker over the served taxonomy, one collapsible group per
 * goal, with a text filter. The picker renders exactly the requirements
 * it was given; it holds no taxonomy data of its own.
 */
export function createLabelPicker(taxonomy: Taxonomy, onChange?: () => void): LabelPicker {
  const root = document.createElement('div');
  root.className = 'picker';

  const selected = new Set<string>();
  const checkboxes = new Map<string, HTMLInputElement>();
  const rows = new Map<string, HTMLElement>();

  const summary = document.createElement('div');
  summary.className = 'picker-selection';
  root.appendChild(summary);

  const search = document.createElement('input');
  search.type = 'search';
  search.className = 'picker-search';
  search.placeholder = 'Filter by id, text, or keyword';
  root.appendChild(search);

  const groups = document.createElement('div');
  groups.className = 'picker-groups';
  root.appendChild(groups);

  function renderSummary(): void {
    const ids = sortRequirementIds(selected);
    summary.textContent = ids.length
      ? `Selected: ${ids.join(', ')}`
      : 'Selected: none';
  }

  function toggle(rid: string, on: boolean): void {
    if (on) {
      selected.add(rid);
    } else {
      selected.delete(rid);
    }
    renderSummary();
    onChange?.();
  }

  for (const goal of taxonomy.goals) {
    const details = document.createElement('details');
    details.className = 'picker-goal';
    details.open = false;
    const heading = document.createElement('summary');
    heading.textContent = `${goal.id}. ${goal.name}`;
    details.appendChild(heading);

    const list = document.createElement('div');
    for (const requirement of taxonomy.requirements) {
      if (requirement.goal_id !== goal.id) continue;
      const row = document.createElement('label');
      row.className = 'picker-row';
      const box = document.createElement('input');
      box.type = 'checkbox';
      box.value = requirement.id;
      box.addEventListener('change', () => toggle(requirement.id, box.checked));
      const text = document.createElement('span');
      text.textContent = `${requirement.id} ${requirement.text}`;
      row.appendChild(box);
      row.appendChild(text);
      list.appendChild(row);
      checkboxes.set(requirement.id, box);
      rows.set(requirement.id, row);
    }
    details.appendChild(list);
    groups.appendChild(details);
  }

  search.addEventListener('input', () => {
    const needle = search.value.trim().toLowerCase();
    for (const requirement of taxonomy.requirements) {
      const row = rows.get(requirement.id);
      if (row) {
        row.hidden = !matches(requirement, needle);
      }
    }
    // expand groups while filtering so hits are visible
    for (const details of groups.querySelectorAll('details')) {
      (details as HTMLDetailsElement).open = needle.length > 0;
    }
  });

  renderSummary();

  return {
    element: root,
    getSelection: () => sortRequirementIds(selected),
    setSelection(ids: string[]): void {
      selected.clear();
      for (const [rid, box] of checkboxes) {
        const on = ids.includes(rid);
        box.checked = on;
        if (on) selected.add(rid);
      }
      renderSummary();
    },
    clear(): void {
      this.setSelection([]);
    },
  };
}
