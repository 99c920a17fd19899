import { createAnnotateView } from './annotate.js';
import { ApiClient } from './api.js';
import { createDisagreementView } from './disagreements.js';
import type { Taxonomy } from './types.js';

type Tab = 'annotate' | 'disagreements';

interface MiniStorage {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface AppOptions {
  storage?: MiniStorage;
}

const STORAGE_KEY = 'privreq-ui.last-choice';

/** Builds the whole single-page app; resolves once the shell has loaded. */
export async function createApp(
  client: ApiClient,
  options: AppOptions = {},
): Promise<HTMLElement> {
  const storage = options.storage ?? window.localStorage;
  const [health, taxonomy, sessionIndex] = await Promise.all([
    client.health(),
    client.taxonomy(),
    client.sessions(),
  ]);

  const root = document.createElement('div');
  root.id = 'app';

  const header = document.createElement('header');
  const title = document.createElement('h1');
  title.textContent = 'privreq';
  header.appendChild(title);
  const mode = document.createElement('span');
  mode.className = 'mode';
  mode.textContent = health.read_only ? 'read-only' : '';
  header.appendChild(mode);
  root.appendChild(header);

  const controls = document.createElement('nav');
  controls.className = 'controls';
  const sessionSelect = document.createElement('select');
  sessionSelect.className = 'session-select';
  const coderSelect = document.createElement('select');
  coderSelect.className = 'coder-select';
  const annotateTab = document.createElement('button');
  annotateTab.className = 'tab-annotate';
  annotateTab.textContent = 'Annotate';
  const disagreeTab = document.createElement('button');
  disagreeTab.className = 'tab-disagreements';
  disagreeTab.textContent = 'Disagreements';
  controls.appendChild(sessionSelect);
  controls.appendChild(coderSelect);
  controls.appendChild(annotateTab);
  controls.appendChild(disagreeTab);
  root.appendChild(controls);

  const viewport = document.createElement('main');
  viewport.className = 'viewport';
  root.appendChild(viewport);

  if (sessionIndex.sessions.length === 0) {
    viewport.textContent = 'No annotation sessions in this project yet.';
    sessionSelect.disabled = true;
    coderSelect.disabled = true;
    annotateTab.disabled = true;
    disagreeTab.disabled = true;
    return root;
  }

  let remembered: { session?: string; coder?: string; tab?: Tab } = {};
  try {
    remembered = JSON.parse(storage.getItem(STORAGE_KEY) ?? '{}');
  } catch {
    remembered = {};
  }

  for (const id of sessionIndex.sessions) {
    const option = document.createElement('option');
    option.value = id;
    option.textContent = id;
    sessionSelect.appendChild(option);
  }
  if (remembered.session && sessionIndex.sessions.includes(remembered.session)) {
    sessionSelect.value = remembered.session;
  }

  let activeTab: Tab = remembered.tab === 'disagreements' ? 'disagreements' : 'annotate';

  function remember(): void {
    storage.setItem(STORAGE_KEY, JSON.stringify({
      session: sessionSelect.value,
      coder: coderSelect.value,
      tab: activeTab,
    }));
  }

  async function loadCoders(): Promise<void> {
    const detail = await client.session(sessionSelect.value);
    coderSelect.textContent = '';
    for (const coder of detail.coders) {
      const option = document.createElement('option');
      option.value = coder;
      option.textContent = coder;
      coderSelect.appendChild(option);
    }
    if (remembered.coder && detail.coders.includes(remembered.coder)) {
      coderSelect.value = remembered.coder;
    }
  }

  async function mountView(tax: Taxonomy): Promise<void> {
    annotateTab.classList.toggle('active', activeTab === 'annotate');
    disagreeTab.classList.toggle('active', activeTab === 'disagreements');
    viewport.textContent = '';
    const view = activeTab === 'annotate'
      ? createAnnotateView(client, tax, sessionSelect.value, coderSelect.value)
      : createDisagreementView(client, tax, sessionSelect.value);
    viewport.appendChild(view.element);
    await view.refresh();
    remember();
  }

  sessionSelect.addEventListener('change', () => {
    void loadCoders().then(() => mountView(taxonomy));
  });
  coderSelect.addEventListener('change', () => void mountView(taxonomy));
  annotateTab.addEventListener('click', () => {
    activeTab = 'annotate';
    void mountView(taxonomy);
  });
  disagreeTab.addEventListener('click', () => {
    activeTab = 'disagreements';
    void mountView(taxonomy);
  });

  await loadCoders();
  await mountView(taxonomy);
  return root;
}
