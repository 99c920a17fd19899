import { ApiClient, ApiError } from './api.js';
import { renderTextWithLinks } from './linkify.js';
import { createLabelPicker } from './picker.js';
import type { Issue, SessionDetail, Taxonomy } from './types.js';

export interface AnnotateView {
  element: HTMLElement;
  refresh(): Promise<void>;
}

/** Issue keys assigned to the coder that the coder has not labeled yet. */
export function pendingIssues(session: SessionDetail, coderId: string): string[] {
  const assigned = session.assignments[coderId] ?? [];
  return assigned.filter((key) => !(coderId in (session.labels[key] ?? {})));
}

export async function fetchIssueMap(
  client: ApiClient,
  corpusName: string,
): Promise<Map<string, Issue>> {
  const map = new Map<string, Issue>();
  let offset = 0;
  for (;;) {
    const page = await client.corpusIssues(corpusName, offset, 200);
    for (const issue of page.issues) {
      map.set(`${issue.source}:${issue.external_id}`, issue);
    }
    offset += page.issues.length;
    if (offset >= page.total || page.issues.length === 0) break;
  }
  return map;
}

export function createAnnotateView(
  client: ApiClient,
  taxonomy: Taxonomy,
  sessionId: string,
  coderId: string,
): AnnotateView {
  const root = document.createElement('section');
  root.className = 'annotate';

  const progress = document.createElement('div');
  progress.className = 'progress';
  root.appendChild(progress);

  const banner = document.createElement('div');
  banner.className = 'banner';
  banner.hidden = true;
  root.appendChild(banner);

  const card = document.createElement('article');
  card.className = 'issue-card';
  root.appendChild(card);

  const picker = createLabelPicker(taxonomy, () => {
    confirmingEmpty = false;
    submit.textContent = 'Submit labels';
  });
  root.appendChild(picker.element);

  const submit = document.createElement('button');
  submit.className = 'submit';
  submit.textContent = 'Submit labels';
  root.appendChild(submit);

  let session: SessionDetail | null = null;
  let issues: Map<string, Issue> = new Map();
  let currentKey: string | null = null;
  let confirmingEmpty = false;

  function showBanner(kind: 'error' | 'retry', text: string): void {
    banner.hidden = false;
    banner.dataset.kind = kind;
    banner.textContent = '';
    banner.appendChild(document.createTextNode(text + ' '));
    if (kind === 'retry') {
      const retry = document.createElement('button');
      retry.textContent = 'Retry';
      retry.addEventListener('click', () => void submitCurrent());
      banner.appendChild(retry);
    }
  }

  function clearBanner(): void {
    banner.hidden = true;
    banner.textContent = '';
  }

  function renderProgress(): void {
    if (!session) return;
    const assigned = session.assignments[coderId] ?? [];
    const done = assigned.length - pendingIssues(session, coderId).length;
    progress.textContent = `${coderId}: ${done} of ${assigned.length} issues labeled`;
  }

  function renderIssue(): void {
    card.textContent = '';
    if (!session) return;
    const pending = pendingIssues(session, coderId);
    currentKey = pending[0] ?? null;
    if (currentKey === null) {
      const done = document.createElement('p');
      done.className = 'all-done';
      done.textContent = 'All assigned issues are labeled.';
      card.appendChild(done);
      submit.disabled = true;
      return;
    }
    submit.disabled = false;
    const issue = issues.get(currentKey);
    const heading = document.createElement('h2');
    heading.textContent = issue ? issue.title : currentKey;
    card.appendChild(heading);
    const keyLine = document.createElement('p');
    keyLine.className = 'issue-key';
    keyLine.textContent = currentKey;
    card.appendChild(keyLine);
    if (issue) {
      const body = document.createElement('p');
      body.className = 'issue-description';
      body.appendChild(renderTextWithLinks(issue.description));
      card.appendChild(body);
      if (issue.url) {
        const link = document.createElement('a');
        link.href = issue.url;
        link.textContent = issue.url;
        link.target = '_blank';
        link.rel = 'noopener noreferrer';
        card.appendChild(link);
      }
    }
    picker.setSelection([]);
    confirmingEmpty = false;
    submit.textContent = 'Submit labels';
  }

  async function refresh(): Promise<void> {
    session = await client.session(sessionId);
    if (issues.size === 0) {
      issues = await fetchIssueMap(client, session.corpus_name);
    }
    renderProgress();
    renderIssue();
  }

  async function submitCurrent(): Promise<void> {
    if (!session || currentKey === null) return;
    const labels = picker.getSelection();
    if (labels.length === 0 && !confirmingEmpty) {
      confirmingEmpty = true;
      submit.textContent = 'Submit empty label set?';
      return;
    }
    submit.disabled = true;
    try {
      await client.postLabel(sessionId, coderId, currentKey, labels);
      clearBanner();
      // re-render from the server's view of the session, never locally
      await refresh();
    } catch (error) {
      submit.disabled = false;
      if (error instanceof ApiError) {
        showBanner('error', `${error.code}: ${error.message}`);
      } else {
        showBanner('retry', 'Network problem; your selection is kept.');
      }
    }
  }

  submit.addEventListener('click', () => void submitCurrent());

  return { element: root, refresh };
}
