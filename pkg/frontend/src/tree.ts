// Navigation tree: one row per interaction point with a status badge, plus a
// breadcrumb of ancestors for back-navigation. Clicking any node (ancestor or
// child) only changes the selection; it never mutates server state.

import { ancestors, statusBadge, type TreeViewModel } from './state';
import type { TreeNode } from './types';

export interface TreeCallbacks {
  onSelect(nodeId: string): void;
}

function nodeRow(node: TreeNode, selected: boolean, cb: TreeCallbacks): HTMLElement {
  const row = document.createElement('div');
  row.className = `tree-node status-${node.status}${selected ? ' selected' : ''}`;
  row.dataset.nodeId = node.id;
  row.style.marginLeft = `${node.depth * 18}px`;

  const name = document.createElement('button');
  name.type = 'button';
  name.className = 'tree-name';
  name.textContent = node.id;
  name.addEventListener('click', () => cb.onSelect(node.id));
  row.appendChild(name);

  const badge = document.createElement('span');
  badge.className = `badge badge-${node.status}`;
  badge.textContent = statusBadge(node.status, node.generation, node.of);
  row.appendChild(badge);

  const meta = document.createElement('span');
  meta.className = 'tree-meta';
  meta.textContent =
    node.status === 'done'
      ? `${node.nps} solutions, ${node.cluster_count} clusters`
      : '';
  row.appendChild(meta);
  return row;
}

export function renderTree(
  container: HTMLElement,
  model: TreeViewModel,
  cb: TreeCallbacks,
): void {
  container.textContent = '';

  const crumb = document.createElement('nav');
  crumb.className = 'breadcrumb';
  for (const node of ancestors(model, model.selectedId)) {
    const link = document.createElement('button');
    link.type = 'button';
    link.className = 'crumb';
    link.textContent = node.id;
    link.addEventListener('click', () => cb.onSelect(node.id));
    crumb.appendChild(link);
  }
  container.appendChild(crumb);

  const list = document.createElement('div');
  list.className = 'tree-list';
  // preorder walk keeps children under their parents
  const byParent = new Map<string | null, TreeNode[]>();
  for (const node of model.nodes.values()) {
    const bucket = byParent.get(node.parent) ?? [];
    bucket.push(node);
    byParent.set(node.parent, bucket);
  }
  const visit = (node: TreeNode) => {
    list.appendChild(nodeRow(node, node.id === model.selectedId, cb));
    const kids = (byParent.get(node.id) ?? []).sort((a, b) => a.id.localeCompare(b.id));
    for (const kid of kids) {
      visit(kid);
    }
  };
  const root = model.nodes.get(model.rootId);
  if (root) {
    visit(root);
  }
  container.appendChild(list);
}
