// One radar card per cluster centroid. Spokes: perfQ, reliability, and the
// cost / antipattern spokes inverted and normalized over this node's
// centroids so a bigger polygon is uniformly better. The caption shows the
// server-provided label words verbatim; the choose button POSTs the
// centroid's cluster id.

import { CLUSTER_COLORS } from './pairplot';
import { atMaxDepth } from './state';
import type { ClusterRow, NodeView, Objectives } from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';
const SIZE = 150;
const R = 52;

export interface RadarCallbacks {
  onChoose(clusterId: number): void;
}

/**
 * Spoke extents per objective over the given centroids: maximized objectives
 * map value->fraction directly, minimized ones are inverted so low cost/pas
 * fill the spoke. Zero ranges render as a mid-size spoke.
 */
export function spokeFractions(rows: ClusterRow[]): Map<number, number[]> {
  const keys: (keyof Objectives)[] = ['perfq', 'reliability', 'cost', 'pas'];
  const inverted = new Set<keyof Objectives>(['cost', 'pas']);
  const out = new Map<number, number[]>();
  const columns = keys.map((k) => rows.map((r) => r.medoid_objectives[k]));
  rows.forEach((row, idx) => {
    const fractions = keys.map((key, kIdx) => {
      const col = columns[kIdx];
      const lo = Math.min(...col);
      const hi = Math.max(...col);
      if (hi <= lo) {
        return 0.5;
      }
      const f = (row.medoid_objectives[key] - lo) / (hi - lo);
      return inverted.has(key) ? 1 - f : f;
    });
    out.set(row.id, fractions);
  });
  return out;
}

const SPOKE_TITLES = ['perfQ', 'reliability', 'cost (inverted)', 'antipatterns (inverted)'];

function radarSvg(row: ClusterRow, fractions: number[]): SVGElement {
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('width', String(SIZE));
  svg.setAttribute('height', String(SIZE));
  svg.setAttribute('class', 'radar');
  const cx = SIZE / 2;
  const cy = SIZE / 2;
  const angle = (i: number) => (Math.PI / 2) * i - Math.PI / 2;

  for (const ring of [0.33, 0.66, 1.0]) {
    const outline = document.createElementNS(SVG_NS, 'polygon');
    outline.setAttribute(
      'points',
      [0, 1, 2, 3]
        .map((i) => `${cx + R * ring * Math.cos(angle(i))},${cy + R * ring * Math.sin(angle(i))}`)
        .join(' '),
    );
    outline.setAttribute('class', 'radar-ring');
    svg.appendChild(outline);
  }
  [0, 1, 2, 3].forEach((i) => {
    const spoke = document.createElementNS(SVG_NS, 'line');
    spoke.setAttribute('x1', String(cx));
    spoke.setAttribute('y1', String(cy));
    spoke.setAttribute('x2', String(cx + R * Math.cos(angle(i))));
    spoke.setAttribute('y2', String(cy + R * Math.sin(angle(i))));
    spoke.setAttribute('class', 'radar-spoke');
    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = SPOKE_TITLES[i];
    spoke.appendChild(title);
    svg.appendChild(spoke);
  });

  const polygon = document.createElementNS(SVG_NS, 'polygon');
  polygon.setAttribute(
    'points',
    fractions
      .map(
        (f, i) =>
          `${cx + R * Math.max(f, 0.04) * Math.cos(angle(i))},` +
          `${cy + R * Math.max(f, 0.04) * Math.sin(angle(i))}`,
      )
      .join(' '),
  );
  polygon.setAttribute('class', 'radar-shape');
  polygon.setAttribute('fill', CLUSTER_COLORS[row.id % CLUSTER_COLORS.length]);
  svg.appendChild(polygon);
  return svg;
}

export function renderRadars(
  container: HTMLElement,
  view: NodeView,
  cb: RadarCallbacks,
): void {
  container.textContent = '';
  const rows = view.clusters ?? [];
  if (!rows.length) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No clusters for this node.';
    container.appendChild(empty);
    return;
  }
  const fractions = spokeFractions(rows);
  const maxed = atMaxDepth(view);
  for (const row of rows) {
    const card = document.createElement('section');
    card.className = 'radar-card';
    card.dataset.clusterId = String(row.id);

    const heading = document.createElement('h3');
    heading.textContent = `cluster ${row.id} (${row.size} solutions)`;
    card.appendChild(heading);

    card.appendChild(radarSvg(row, fractions.get(row.id) ?? []));

    const caption = document.createElement('p');
    caption.className = 'radar-caption';
    caption.textContent = row.label;
    card.appendChild(caption);

    const values = document.createElement('p');
    values.className = 'radar-values';
    values.textContent =
      `perfQ ${row.medoid_objectives.perfq} · ` +
      `reliability ${row.medoid_objectives.reliability} · ` +
      `cost ${row.medoid_objectives.cost} · ` +
      `pas ${row.medoid_objectives.pas}`;
    card.appendChild(values);

    const button = document.createElement('button');
    button.type = 'button';
    button.className = 'choose';
    button.textContent = row.child ? 'open child' : 'choose';
    if (maxed) {
      button.disabled = true;
      button.title = 'interaction budget exhausted';
    } else {
      button.addEventListener('click', () => cb.onChoose(row.id));
    }
    card.appendChild(button);
    container.appendChild(card);
  }
}
