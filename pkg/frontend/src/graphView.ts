/** Render the learned graph plus per-node query coloring as an SVG string.
 *
 * Pure function of the API's graph and translation payloads, so it can be
 * exercised without a browser.
 */

import { glyphSvg } from './glyphs.js';
import { layoutGraph } from './graphLayout.js';
import type { GraphJson, Semantics } from './types.js';

export interface GraphViewOptions {
  width?: number;
  height?: number;
  /** per-node coloring from a why-query */
  semantics?: Record<string, { semantics: Semantics; rule: string }>;
  measure?: string;
  foreground?: string;
}

const COLORS: Record<string, string> = {
  causal: '#2e8b57',
  non_causal: '#8a2be2',
  no_explainability: '#9aa0a6',
  measure: '#d9552a',
  foreground: '#1a73e8',
  plain: '#444',
};

export function nodeColor(
  node: string,
  opts: GraphViewOptions,
): { fill: string; role: string } {
  if (node === opts.measure) return { fill: COLORS.measure, role: 'measure' };
  if (node === opts.foreground) return { fill: COLORS.foreground, role: 'foreground' };
  const sem = opts.semantics?.[node];
  if (!sem) return { fill: COLORS.plain, role: 'plain' };
  return { fill: COLORS[sem.semantics], role: sem.semantics };
}

const NODE_R = 16;

export function renderGraphSvg(graph: GraphJson, opts: GraphViewOptions = {}): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 420;
  if (graph.nodes.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"><text class="placeholder" x="${width / 2}" y="${height / 2}" text-anchor="middle">no graph learned yet</text></svg>`;
  }
  const pos = layoutGraph(graph, width, height);
  const parts: string[] = [];
  for (const e of graph.edges) {
    const a = pos[e.u];
    const b = pos[e.v];
    const dist = Math.max(Math.hypot(b.x - a.x, b.y - a.y), 0.01);
    const dx = (b.x - a.x) / dist;
    const dy = (b.y - a.y) / dist;
    const ax = a.x + dx * NODE_R;
    const ay = a.y + dy * NODE_R;
    const bx = b.x - dx * NODE_R;
    const by = b.y - dy * NODE_R;
    parts.push(
      `<g class="edge" data-edge="${e.u}|${e.v}" data-marks="${e.mark_u},${e.mark_v}">` +
        `<line x1="${ax.toFixed(1)}" y1="${ay.toFixed(1)}" x2="${bx.toFixed(1)}" y2="${by.toFixed(1)}" stroke="currentColor"/>` +
        glyphSvg(e.mark_u, ax, ay, -dx, -dy) +
        glyphSvg(e.mark_v, bx, by, dx, dy) +
        `</g>`,
    );
  }
  for (const n of graph.nodes) {
    const p = pos[n];
    const { fill, role } = nodeColor(n, opts);
    const sem = opts.semantics?.[n];
    const rule = sem ? ` data-rule="${sem.rule}"` : '';
    parts.push(
      `<g class="node" data-node="${n}" data-role="${role}"${rule}>` +
        `<circle cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="${NODE_R}" fill="${fill}"/>` +
        `<text x="${p.x.toFixed(1)}" y="${(p.y - NODE_R - 4).toFixed(1)}" text-anchor="middle">${n}</text>` +
        `</g>`,
    );
  }
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">${parts.join('')}</svg>`;
}
