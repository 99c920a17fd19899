import { afterEach, describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../../src/api.js';
import { installFetchStub, jsonResponse } from '../helpers.js';

let restore: (() => void) | null = null;

afterEach(() => {
  restore?.();
  restore = null;
});

describe('ApiClient', () => {
  it('parses a 2xx JSON body', async () => {
    const stub = installFetchStub(() => jsonResponse({ status: 'ok', read_only: false }));
    restore = stub.restore;
    const health = await new ApiClient().health();
    expect(health.read_only).toBe(false);
    expect(stub.calls[0]!.url).toBe('/api/health');
  });

  it('prefixes a base URL and sends the bearer token', async () => {
    const stub = installFetchStub(() => jsonResponse({ version: 't', goals: [], requirements: [] }));
    restore = stub.restore;
    await new ApiClient('http://127.0.0.1:9', 'sesame').taxonomy();
    const call = stub.calls[0]!;
    expect(call.url).toBe('http://127.0.0.1:9/api/taxonomy');
    expect(call.headers['Authorization']).toBe('Bearer sesame');
  });

  it('turns a structured error body into an ApiError', async () => {
    const stub = installFetchStub(() =>
      jsonResponse({ code: 'unknown_requirement', message: 'R99 is not defined' }, 422));
    restore = stub.restore;
    const err = await new ApiClient()
      .postLabel('s1', 'maya', 'synth:1', ['R99'])
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(422);
    expect(apiErr.code).toBe('unknown_requirement');
    expect(apiErr.message).toBe('R99 is not defined');
  });

  it('falls back to the status line for a non-JSON error body', async () => {
    const stub = installFetchStub(() =>
      new Response('gateway exploded', { status: 502, statusText: 'Bad Gateway' }));
    restore = stub.restore;
    const err = await new ApiClient().health().catch((e: unknown) => e) as ApiError;
    expect(err.code).toBe('http_error');
    expect(err.status).toBe(502);
  });

  it('sends labels with a JSON content type', async () => {
    const stub = installFetchStub(() => jsonResponse({
      session_id: 's1', coder_id: 'maya', issue_key: 'synth:1',
      labels: ['R1'], annotated_at: 'now',
    }, 201));
    restore = stub.restore;
    await new ApiClient().postLabel('s1', 'maya', 'synth:1', ['R1'], 'hmm');
    const call = stub.calls[0]!;
    expect(call.method).toBe('POST');
    expect(call.headers['Content-Type']).toBe('application/json');
    expect(call.body).toEqual({
      coder_id: 'maya', issue_key: 'synth:1', labels: ['R1'], note: 'hmm',
    });
  });

  it('omits final_labels from a combined resolution unless given', async () => {
    const stub = installFetchStub(() => jsonResponse({
      issue_key: 'synth:1', final_labels: ['R1'], method: 'combined', notes: '',
    }, 201));
    restore = stub.restore;
    const client = new ApiClient();
    await client.postResolution('s1', 'synth:1', 'combined');
    expect(stub.calls[0]!.body).toEqual({ issue_key: 'synth:1', method: 'combined' });
    await client.postResolution('s1', 'synth:1', 'reclassified', ['R2'], 'why');
    expect(stub.calls[1]!.body).toEqual({
      issue_key: 'synth:1', method: 'reclassified', final_labels: ['R2'], notes: 'why',
    });
  });

  it('escapes path segments', async () => {
    const stub = installFetchStub(() => jsonResponse({
      name: 'a b', total: 0, offset: 0, limit: 50, issues: [],
    }));
    restore = stub.restore;
    await new ApiClient().corpusIssues('a b');
    expect(stub.calls[0]!.url).toBe('/api/corpora/a%20b/issues?offset=0&limit=50');
  });
});
