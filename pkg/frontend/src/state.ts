// View models and the polling controller.
//
// TreeViewModel mirrors GET /tree exactly; the selection is always a known
// node. Polling runs at 1s, backing off to 5s, and stops once every visible
// node is done or failed.

import type { ApiClient } from './api';
import type { NodeStatus, NodeView, TreeNode, TreePayload } from './types';

export interface TreeViewModel {
  nodes: Map<string, TreeNode>;
  rootId: string;
  selectedId: string;
}

export function buildTreeViewModel(
  payload: TreePayload,
  selectedId: string | null,
): TreeViewModel {
  const nodes = new Map<string, TreeNode>();
  for (const node of payload.nodes) {
    nodes.set(node.id, node);
  }
  const rootId = payload.nodes.length ? payload.nodes[0].id : 'root';
  const selection = selectedId !== null && nodes.has(selectedId) ? selectedId : rootId;
  return { nodes, rootId, selectedId: selection };
}

export function ancestors(model: TreeViewModel, nodeId: string): TreeNode[] {
  const chain: TreeNode[] = [];
  let current = model.nodes.get(nodeId);
  while (current) {
    chain.unshift(current);
    current = current.parent !== null ? model.nodes.get(current.parent) : undefined;
  }
  return chain;
}

export function allSettled(model: TreeViewModel): boolean {
  for (const node of model.nodes.values()) {
    if (node.status === 'running' || node.status === 'idle') {
      return false;
    }
  }
  return true;
}

export const POLL_START_MS = 1000;
export const POLL_MAX_MS = 5000;

export function nextPollDelay(previous: number | null): number {
  if (previous === null) {
    return POLL_START_MS;
  }
  return Math.min(previous * 2, POLL_MAX_MS);
}

export interface PollHandle {
  stop(): void;
}

/** Polls the tree until every node settles; invokes onTree per fetch. */
export function pollTree(
  api: ApiClient,
  sessionId: string,
  onTree: (payload: TreePayload) => void,
  schedule: (fn: () => void, ms: number) => unknown = (fn, ms) => setTimeout(fn, ms),
): PollHandle {
  let stopped = false;
  let delay: number | null = null;

  const tick = async () => {
    if (stopped) {
      return;
    }
    const payload = await api.tree(sessionId);
    if (stopped) {
      return;
    }
    onTree(payload);
    const settled = payload.nodes.every(
      (n) => n.status === 'done' || n.status === 'failed',
    );
    if (settled) {
      return;
    }
    delay = nextPollDelay(delay);
    schedule(tick, delay);
  };

  void tick();
  return {
    stop() {
      stopped = true;
    },
  };
}

export function statusBadge(status: NodeStatus, generation: number, of: number): string {
  if (status === 'running') {
    return `running ${generation}/${of}`;
  }
  return status;
}

/** True when the node cannot expand further (interaction budget spent). */
export function atMaxDepth(view: NodeView): boolean {
  return view.depth >= view.max_depth;
}
