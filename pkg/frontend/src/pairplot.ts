// Scatter matrix of the four objectives: the six unique off-diagonal pairs,
// points colored by cluster, medoids emphasized. Hover titles carry the exact
// server-provided objective values and the label words; nothing is recomputed.

import {
  OBJECTIVE_KEYS,
  OBJECTIVE_TITLES,
  type ArchiveSolution,
  type NodeView,
  type Solution,
} from './types';

export const CLUSTER_COLORS = [
  '#4269d0',
  '#efb118',
  '#ff725c',
  '#6cc5b0',
  '#3ca951',
  '#ff8ab7',
  '#a463f2',
  '#97bbf5',
];

const SVG_NS = 'http://www.w3.org/2000/svg';
const PANEL = 130;
const PAD = 14;

export interface PairPanel {
  x: keyof Solution['objectives'];
  y: keyof Solution['objectives'];
}

/** The 6 unique objective pairs, upper-triangle order. */
export function uniquePairs(): PairPanel[] {
  const pairs: PairPanel[] = [];
  for (let i = 0; i < OBJECTIVE_KEYS.length; i += 1) {
    for (let j = i + 1; j < OBJECTIVE_KEYS.length; j += 1) {
      pairs.push({ x: OBJECTIVE_KEYS[i], y: OBJECTIVE_KEYS[j] });
    }
  }
  return pairs;
}

function scale(values: number[], span: number): (v: number) => number {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (hi <= lo) {
    // degenerate axis: a single tick in the middle
    return () => span / 2;
  }
  return (v: number) => ((v - lo) / (hi - lo)) * span;
}

export function renderPairplot(
  container: HTMLElement,
  view: NodeView,
  archive: ArchiveSolution[] = [],
): void {
  container.textContent = '';
  const front = view.front ?? [];
  if (!front.length) {
    const empty = document.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No solutions in this front yet.';
    container.appendChild(empty);
    return;
  }
  const pairs = uniquePairs();
  const svg = document.createElementNS(SVG_NS, 'svg');
  const cols = 3;
  const rows = Math.ceil(pairs.length / cols);
  svg.setAttribute('width', String(cols * (PANEL + PAD) + PAD));
  svg.setAttribute('height', String(rows * (PANEL + PAD) + PAD));
  svg.setAttribute('class', 'pairplot');

  pairs.forEach((pair, index) => {
    const gx = PAD + (index % cols) * (PANEL + PAD);
    const gy = PAD + Math.floor(index / cols) * (PANEL + PAD);
    const panel = document.createElementNS(SVG_NS, 'g');
    panel.setAttribute('transform', `translate(${gx},${gy})`);
    panel.setAttribute('class', 'panel');

    const frame = document.createElementNS(SVG_NS, 'rect');
    frame.setAttribute('width', String(PANEL));
    frame.setAttribute('height', String(PANEL));
    frame.setAttribute('class', 'panel-frame');
    panel.appendChild(frame);

    const caption = document.createElementNS(SVG_NS, 'text');
    caption.setAttribute('x', '4');
    caption.setAttribute('y', '12');
    caption.setAttribute('class', 'panel-caption');
    caption.textContent = `${OBJECTIVE_TITLES[pair.y]} vs ${OBJECTIVE_TITLES[pair.x]}`;
    panel.appendChild(caption);

    // scales span the union so dominated archive points sit in context
    const everything = [...archive, ...front];
    const sx = scale(everything.map((s) => s.objectives[pair.x]), PANEL - 20);
    const sy = scale(everything.map((s) => s.objectives[pair.y]), PANEL - 26);

    archive.forEach((solution) => {
      const dot = document.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(10 + sx(solution.objectives[pair.x])));
      dot.setAttribute('cy', String(PANEL - 8 - sy(solution.objectives[pair.y])));
      dot.setAttribute('r', '2');
      dot.setAttribute('fill', '#c2c7cf');
      dot.setAttribute('class', 'dot-archive');
      panel.appendChild(dot);
    });

    front.forEach((solution) => {
      const cx = 10 + sx(solution.objectives[pair.x]);
      const cy = PANEL - 8 - sy(solution.objectives[pair.y]);
      const dot = document.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(cx));
      dot.setAttribute('cy', String(cy));
      dot.setAttribute('r', solution.medoid ? '5' : '3');
      dot.setAttribute('fill', CLUSTER_COLORS[solution.cluster % CLUSTER_COLORS.length]);
      dot.setAttribute('class', solution.medoid ? 'dot medoid' : 'dot');
      const title = document.createElementNS(SVG_NS, 'title');
      title.textContent =
        `${solution.label}\n` +
        OBJECTIVE_KEYS.map((k) => `${OBJECTIVE_TITLES[k]}: ${solution.objectives[k]}`).join('\n');
      dot.appendChild(title);
      panel.appendChild(dot);
    });
    svg.appendChild(panel);
  });
  container.appendChild(svg);
}
