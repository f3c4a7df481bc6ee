// KDE landscape heatmap: paints the server-provided 64x64 density grid on a
// canvas and overlays the projected points. Values arrive precomputed.

import type { LandscapePayload } from './types';

const CELL = 4;

export function renderLandscape(container: HTMLElement, payload: LandscapePayload): void {
  container.textContent = '';
  const grid = payload.kde.grid;
  const size = grid.length;
  const canvas = document.createElement('canvas');
  canvas.width = size * CELL;
  canvas.height = size * CELL;
  canvas.className = 'landscape';
  const ctx = canvas.getContext('2d');
  if (ctx) {
    let peak = 0;
    for (const row of grid) {
      for (const v of row) {
        peak = Math.max(peak, v);
      }
    }
    for (let y = 0; y < size; y += 1) {
      for (let x = 0; x < size; x += 1) {
        const t = peak > 0 ? grid[y][x] / peak : 0;
        ctx.fillStyle = `rgba(66, 105, 208, ${t.toFixed(3)})`;
        // grid row 0 is the lowest y value; canvas y grows downward
        ctx.fillRect(x * CELL, (size - 1 - y) * CELL, CELL, CELL);
      }
    }
    const [xLo, xHi, yLo, yHi] = payload.kde.extent;
    ctx.fillStyle = '#222';
    for (const [px, py] of payload.points) {
      const x = ((px - xLo) / (xHi - xLo)) * canvas.width;
      const y = canvas.height - ((py - yLo) / (yHi - yLo)) * canvas.height;
      ctx.fillRect(x - 1, y - 1, 2, 2);
    }
  }
  container.appendChild(canvas);

  const caption = document.createElement('p');
  caption.className = 'landscape-caption';
  caption.textContent = `explained variance: ${payload.explained_variance
    .map((f) => `${(f * 100).toFixed(1)}%`)
    .join(' / ')}`;
  container.appendChild(caption);
}
