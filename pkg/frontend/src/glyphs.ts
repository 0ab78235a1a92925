/** Edge endpoint marks to SVG glyph primitives.
 *
 * The four edge kinds (directed, bidirected, circle-arrow, circle-circle)
 * plus the undirected tail-tail edge all reduce to a per-endpoint glyph:
 * nothing for a tail, a filled arrowhead for an arrow, an open circle for an
 * undetermined endpoint.
 */

import type { Mark } from './types.js';

export interface EndpointGlyph {
  kind: 'none' | 'arrowhead' | 'circle';
}

export function endpointGlyph(mark: Mark): EndpointGlyph {
  switch (mark) {
    case 'tail':
      return { kind: 'none' };
    case 'arrow':
      return { kind: 'arrowhead' };
    case 'circle':
      return { kind: 'circle' };
  }
}

/** Human-readable label of an edge, e.g. "a o-> b". */
export function edgeLabel(u: string, v: string, markU: Mark, markV: Mark): string {
  const left = markU === 'arrow' ? '<' : markU === 'circle' ? 'o' : '-';
  const right = markV === 'arrow' ? '>' : markV === 'circle' ? 'o' : '-';
  return `${u} ${left}-${right} ${v}`;
}

const GLYPH_SIZE = 5;

/** SVG fragment drawing one endpoint glyph at (x, y) pointing along (dx, dy). */
export function glyphSvg(mark: Mark, x: number, y: number, dx: number, dy: number): string {
  const g = endpointGlyph(mark);
  if (g.kind === 'none') return '';
  if (g.kind === 'circle') {
    const cx = x - dx * GLYPH_SIZE;
    const cy = y - dy * GLYPH_SIZE;
    return `<circle class="glyph-circle" cx="${cx.toFixed(1)}" cy="${cy.toFixed(1)}" r="${GLYPH_SIZE}" fill="white" stroke="currentColor"/>`;
  }
  const ox = -dy;
  const oy = dx;
  const bx = x - dx * GLYPH_SIZE * 2;
  const by = y - dy * GLYPH_SIZE * 2;
  const p1 = `${x.toFixed(1)},${y.toFixed(1)}`;
  const p2 = `${(bx + ox * GLYPH_SIZE).toFixed(1)},${(by + oy * GLYPH_SIZE).toFixed(1)}`;
  const p3 = `${(bx - ox * GLYPH_SIZE).toFixed(1)},${(by - oy * GLYPH_SIZE).toFixed(1)}`;
  return `<polygon class="glyph-arrow" points="${p1} ${p2} ${p3}" fill="currentColor"/>`;
}
