import type { Issue, Requirement, Taxonomy } from '../src/types.js';

export function requirement(
  id: string,
  goalId: number,
  text: string,
  keywords: string[] = [],
): Requirement {
  return {
    id,
    action_verb: text.split(' ')[0] ?? 'ALLOW',
    object: null,
    complement: text,
    text,
    goal_id: goalId,
    sources: [{ regulation: 'GDPR', clause: '1' }],
    keywords,
    merged_from: [],
    reconstructed: false,
  };
}

export function miniTaxonomy(): Taxonomy {
  return {
    version: 'test',
    goals: [
      { id: 1, name: 'Deletion', description: '', expected_requirement_count: 2 },
      { id: 2, name: 'Consent', description: '', expected_requirement_count: 2 },
    ],
    requirements: [
      requirement('R1', 1, 'ERASE stored data on request', ['erase', 'delete']),
      requirement('R2', 1, 'PURGE backups after the retention period', ['retention']),
      requirement('R10', 2, 'OBTAIN consent before tracking', ['consent', 'tracking']),
      requirement('R11', 2, 'ALLOW users to withdraw consent', ['withdraw']),
    ],
  };
}

export function makeIssue(externalId: string, overrides: Partial<Issue> = {}): Issue {
  return {
    source: 'synth',
    external_id: externalId,
    url: null,
    title: `Issue ${externalId}`,
    description: `Description of issue ${externalId}.`,
    components: ['privacy'],
    status: 'fixed',
    created_at: '2021-01-01T00:00:00+00:00',
    resolved_at: null,
    comment_count: 0,
    ...overrides,
  };
}

export class MemoryStorage {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

export async function waitFor(
  predicate: () => boolean,
  what: string,
  timeoutMs = 15000,
): Promise<void> {
  const start = Date.now();
  while (!predicate()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${what}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export interface FetchCall {
  method: string;
  url: string;
  body: unknown;
  headers: Record<string, string>;
}

/** One-session fake backend used by the app shell and bundle tests. */
export function appBackendRoute(call: FetchCall): Response {
  if (call.url === '/api/health') {
    return jsonResponse({ status: 'ok', read_only: false });
  }
  if (call.url === '/api/taxonomy') {
    return jsonResponse(miniTaxonomy());
  }
  if (call.url === '/api/sessions') {
    return jsonResponse({ sessions: ['s1'] });
  }
  if (call.url.includes('/disagreements')) {
    return jsonResponse({ disagreements: [] });
  }
  if (call.url.includes('/irr')) {
    return jsonResponse({
      metric: 'krippendorff_alpha', value: 1, n_items: 1,
      n_coders: 2, distance: 'masi', excluded_items: 0,
    });
  }
  if (call.url.startsWith('/api/sessions/s1')) {
    return jsonResponse({
      session_id: 's1', corpus_name: 'c', coders: ['maya', 'iris'],
      plan: { kind: 'all-to-all' },
      assignments: { maya: ['synth:1'], iris: ['synth:1'] },
      issue_keys: ['synth:1'],
      labels: {},
    });
  }
  if (call.url.startsWith('/api/corpora/c/issues')) {
    return jsonResponse({
      name: 'c', total: 1, offset: 0, limit: 200, issues: [makeIssue('1')],
    });
  }
  throw new Error(`unrouted call: ${call.method} ${call.url}`);
}

export type FetchRouter = (call: FetchCall) => Response | Promise<Response>;

/**
 * Replaces global fetch with a router over parsed calls and records
 * every call. Returns a restore function for afterEach.
 */
export function installFetchStub(router: FetchRouter): {
  calls: FetchCall[];
  restore: () => void;
} {
  const original = globalThis.fetch;
  const calls: FetchCall[] = [];
  globalThis.fetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = typeof input === 'string' ? input : input instanceof URL ? input.href : input.url;
    const call: FetchCall = {
      method: init?.method ?? 'GET',
      url,
      body: init?.body ? JSON.parse(String(init.body)) : null,
      headers: (init?.headers as Record<string, string>) ?? {},
    };
    calls.push(call);
    return router(call);
  }) as typeof fetch;
  return {
    calls,
    restore: () => {
      globalThis.fetch = original;
    },
  };
}
