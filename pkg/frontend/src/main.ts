// Console wiring: session bootstrap, tree polling, node selection, choose.

import { ApiClient, ApiError } from './api';
import { renderLandscape } from './landscape';
import { renderPairplot } from './pairplot';
import { renderRadars } from './radar';
import { buildTreeViewModel, pollTree, type PollHandle } from './state';
import { renderTree } from './tree';
import type { TreePayload } from './types';

const api = new ApiClient('');

interface Ui {
  tree: HTMLElement;
  pairplot: HTMLElement;
  radars: HTMLElement;
  landscape: HTMLElement;
  status: HTMLElement;
  fullArchive: HTMLInputElement;
}

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing #${id}`);
  }
  return found;
}

function toast(ui: Ui, message: string): void {
  ui.status.textContent = message;
  ui.status.classList.add('visible');
  setTimeout(() => ui.status.classList.remove('visible'), 4000);
}

async function showNode(ui: Ui, sessionId: string, nodeId: string): Promise<void> {
  const wantArchive = ui.fullArchive.checked;
  const view = await api.node(sessionId, nodeId, wantArchive ? 'archive' : undefined);
  if (view.status !== 'done') {
    ui.pairplot.textContent =
      view.status === 'failed'
        ? `node failed: ${view.error ?? 'unknown error'}`
        : `segment running: generation ${view.generation} of ${view.of}`;
    ui.radars.textContent = '';
    ui.landscape.textContent = '';
    return;
  }
  renderPairplot(ui.pairplot, view, wantArchive ? (view.archive_solutions ?? []) : []);
  renderRadars(ui.radars, view, {
    onChoose: async (clusterId) => {
      if (chooseInFlight.has(nodeId)) {
        return; // at most one in-flight choose per node
      }
      chooseInFlight.add(nodeId);
      try {
        const { child } = await api.choose(sessionId, nodeId, clusterId);
        select(ui, sessionId, child);
      } catch (err) {
        if (err instanceof ApiError) {
          toast(ui, String((err.body as { error?: string }).error ?? err.message));
        } else {
          throw err;
        }
      } finally {
        chooseInFlight.delete(nodeId);
      }
    },
  });
  try {
    renderLandscape(ui.landscape, await api.landscape(sessionId, nodeId));
  } catch (err) {
    if (err instanceof ApiError) {
      ui.landscape.textContent = '';
    } else {
      throw err;
    }
  }
}

let selected: string | null = null;
let poller: PollHandle | null = null;
const chooseInFlight = new Set<string>();

function select(ui: Ui, sessionId: string, nodeId: string): void {
  selected = nodeId;
  restartPolling(ui, sessionId);
}

function restartPolling(ui: Ui, sessionId: string): void {
  poller?.stop();
  poller = pollTree(api, sessionId, (payload: TreePayload) => {
    const model = buildTreeViewModel(payload, selected);
    selected = model.selectedId;
    renderTree(ui.tree, model, {
      onSelect: (nodeId) => select(ui, sessionId, nodeId),
    });
    void showNode(ui, sessionId, model.selectedId);
  });
}

async function boot(): Promise<void> {
  const ui: Ui = {
    tree: el('tree'),
    pairplot: el('pairplot'),
    radars: el('radars'),
    landscape: el('landscape'),
    status: el('status'),
    fullArchive: el('full-archive') as HTMLInputElement,
  };
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get('session');
  if (!sessionId) {
    const fixture = params.get('fixture') ?? 'ttbs';
    const created = await api.createSession({
      model_fixture: fixture,
      config: {
        iterations: Number(params.get('iterations') ?? 100),
        chromosome_length: Number(params.get('length') ?? 8),
        interactions: Number(params.get('interactions') ?? 3),
        population_size: Number(params.get('population') ?? 16),
        seed: Number(params.get('seed') ?? 91),
        cluster_k: 4,
      },
    });
    sessionId = created.id;
    const url = new URL(window.location.href);
    url.searchParams.set('session', sessionId);
    window.history.replaceState(null, '', url.toString());
  }
  el('session-id').textContent = sessionId;
  ui.fullArchive.addEventListener('change', () => {
    if (selected) {
      void showNode(ui, sessionId!, selected);
    }
  });
  restartPolling(ui, sessionId);
}

void boot();
