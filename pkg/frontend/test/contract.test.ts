// Contract fidelity: the console performs no objective math. Every numeric
// value it renders must appear verbatim in the recorded API payload.

import { describe, expect, it } from 'vitest';

import { renderPairplot } from '../src/pairplot';
import { renderRadars } from '../src/radar';
import { renderLandscape } from '../src/landscape';
import type { LandscapePayload, NodeView } from '../src/types';

import nodeView from './fixtures/node_view.json';
import landscape from './fixtures/landscape.json';

const view = nodeView as unknown as NodeView;
const land = landscape as unknown as LandscapePayload;

/** Every number in a payload, rendered exactly as JS stringifies it. */
function payloadNumbers(value: unknown, out: Set<string>): Set<string> {
  if (typeof value === 'number') {
    out.add(String(value));
  } else if (Array.isArray(value)) {
    for (const item of value) {
      payloadNumbers(item, out);
    }
  } else if (value && typeof value === 'object') {
    for (const item of Object.values(value)) {
      payloadNumbers(item, out);
    }
  }
  return out;
}

const NUMBER_RE = /-?\d+(?:\.\d+)?(?:e[+-]?\d+)?/gi;

function renderedNumbers(text: string): string[] {
  return text.match(NUMBER_RE) ?? [];
}

describe('contract fidelity', () => {
  it('radar captions and values quote the payload verbatim', () => {
    const host = document.createElement('div');
    renderRadars(host, view, { onChoose: () => undefined });
    const allowed = payloadNumbers(view, new Set<string>());
    for (const row of host.querySelectorAll('.radar-values')) {
      for (const num of renderedNumbers(row.textContent ?? '')) {
        expect(allowed.has(num), `${num} not in payload`).toBe(true);
      }
    }
    for (const caption of host.querySelectorAll('.radar-caption')) {
      const labels = view.clusters!.map((c) => c.label);
      expect(labels).toContain(caption.textContent);
    }
  });

  it('pairplot hover titles quote objective values verbatim', () => {
    const host = document.createElement('div');
    renderPairplot(host, view);
    const allowed = payloadNumbers(
      view.front!.map((s) => s.objectives),
      new Set<string>(),
    );
    for (const title of host.querySelectorAll('circle.dot > title')) {
      for (const line of (title.textContent ?? '').split('\n').slice(1)) {
        for (const num of renderedNumbers(line)) {
          expect(allowed.has(num), `${num} not in payload`).toBe(true);
        }
      }
    }
  });

  it('landscape renders exactly the served grid dimensions', () => {
    const host = document.createElement('div');
    renderLandscape(host, land);
    const canvas = host.querySelector('canvas')!;
    expect(canvas.width).toBe(land.kde.grid.length * 4);
    // explained variance is a formatting of served fractions only
    const caption = host.querySelector('.landscape-caption')!.textContent!;
    for (const fraction of land.explained_variance) {
      expect(caption).toContain(`${(fraction * 100).toFixed(1)}%`);
    }
  });

  it('solution dot counts equal the payload count (no client filtering)', () => {
    const host = document.createElement('div');
    renderPairplot(host, view);
    expect(host.querySelectorAll('circle.dot').length).toBe(6 * view.front!.length);
  });
});
