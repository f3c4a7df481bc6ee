// Thin typed client over the session service. Every request is recorded in
// a log so tests can assert, e.g., that back-navigation never mutates server
// state (GET-only).

import type { LandscapePayload, NodeView, TreePayload } from './types';

export interface RequestRecord {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
  }
}

export class ApiClient {
  readonly log: RequestRecord[] = [];

  constructor(
    private readonly base: string = '',
    private readonly fetcher: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.log.push({ method, path });
    const resp = await this.fetcher(this.base + path, {
      method,
      headers: body === undefined ? undefined : { 'content-type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, payload);
    }
    return payload as T;
  }

  createSession(payload: unknown): Promise<{ id: string }> {
    return this.request('POST', '/sessions', payload);
  }

  session(id: string): Promise<Record<string, unknown>> {
    return this.request('GET', `/sessions/${id}`);
  }

  tree(id: string): Promise<TreePayload> {
    return this.request('GET', `/sessions/${id}/tree`);
  }

  node(id: string, nodeId: string, scope?: 'archive'): Promise<NodeView> {
    const suffix = scope ? `?scope=${scope}` : '';
    return this.request('GET', `/sessions/${id}/nodes/${nodeId}${suffix}`);
  }

  landscape(id: string, nodeId: string): Promise<LandscapePayload> {
    return this.request('GET', `/sessions/${id}/nodes/${nodeId}/landscape`);
  }

  choose(id: string, nodeId: string, cluster: number): Promise<{ child: string }> {
    return this.request('POST', `/sessions/${id}/nodes/${nodeId}/choose`, { cluster });
  }
}
