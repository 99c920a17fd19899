import type {
  Disagreement,
  GoldExport,
  Health,
  IrrResult,
  IssuePage,
  LabelRecord,
  Resolution,
  SessionDetail,
  Taxonomy,
} from './types.js';

/** A non-2xx API response, carrying the server's error code verbatim. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = 'http_error';
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === 'string') {
      code = body.code;
      message = typeof body.message === 'string' ? body.message : message;
    } else if (body && body.detail) {
      message = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(
    private readonly base = '',
    private readonly token?: string,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const headers: Record<string, string> = {
      ...(init?.body ? { 'Content-Type': 'application/json' } : {}),
      ...(this.token ? { Authorization: `Bearer ${this.token}` } : {}),
    };
    const response = await fetch(this.base + path, { ...init, headers });
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<Health> {
    return this.request('/api/health');
  }

  taxonomy(): Promise<Taxonomy> {
    return this.request('/api/taxonomy');
  }

  corpusIssues(name: string, offset = 0, limit = 50): Promise<IssuePage> {
    const q = new URLSearchParams({ offset: String(offset), limit: String(limit) });
    return this.request(`/api/corpora/${encodeURIComponent(name)}/issues?${q}`);
  }

  sessions(): Promise<{ sessions: string[] }> {
    return this.request('/api/sessions');
  }

  session(id: string): Promise<SessionDetail> {
    return this.request(`/api/sessions/${encodeURIComponent(id)}`);
  }

  postLabel(
    sessionId: string,
    coderId: string,
    issueKey: string,
    labels: string[],
    note?: string,
  ): Promise<LabelRecord> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/labels`, {
      method: 'POST',
      body: JSON.stringify({
        coder_id: coderId,
        issue_key: issueKey,
        labels,
        ...(note ? { note } : {}),
      }),
    });
  }

  disagreements(sessionId: string): Promise<{ disagreements: Disagreement[] }> {
    return this.request(
      `/api/sessions/${encodeURIComponent(sessionId)}/disagreements`,
    );
  }

  postResolution(
    sessionId: string,
    issueKey: string,
    method: 'combined' | 'reclassified',
    finalLabels?: string[],
    notes?: string,
  ): Promise<Resolution> {
    return this.request(
      `/api/sessions/${encodeURIComponent(sessionId)}/resolutions`,
      {
        method: 'POST',
        body: JSON.stringify({
          issue_key: issueKey,
          method,
          ...(finalLabels !== undefined ? { final_labels: finalLabels } : {}),
          ...(notes ? { notes } : {}),
        }),
      },
    );
  }

  irr(sessionId: string, metric = 'alpha', distance = 'masi'): Promise<IrrResult> {
    const q = new URLSearchParams({ metric, distance });
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/irr?${q}`);
  }

  exportGold(sessionId: string, name: string): Promise<GoldExport> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/gold`, {
      method: 'POST',
      body: JSON.stringify({ name }),
    });
  }
}
