/** Deterministic force-directed layout; pure function of the graph JSON. */

import type { GraphJson } from './types.js';

export interface NodePosition {
  x: number;
  y: number;
}

/** Simple seeded PRNG (mulberry32) so layouts are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutGraph(
  graph: GraphJson,
  width = 640,
  height = 420,
  iterations = 150,
): Record<string, NodePosition> {
  const nodes = [...graph.nodes].sort();
  const rand = mulberry32(42);
  const pos: Record<string, NodePosition> = {};
  for (const n of nodes) {
    pos[n] = { x: (0.1 + 0.8 * rand()) * width, y: (0.1 + 0.8 * rand()) * height };
  }
  if (nodes.length <= 1) return pos;

  const k = Math.sqrt((width * height) / nodes.length) * 0.6;
  const edges = graph.edges.map((e) => [e.u, e.v] as const);
  for (let it = 0; it < iterations; it++) {
    const cool = 1 - it / iterations;
    const disp: Record<string, NodePosition> = {};
    for (const n of nodes) disp[n] = { x: 0, y: 0 };
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const a = nodes[i];
        const b = nodes[j];
        const dx = pos[a].x - pos[b].x;
        const dy = pos[a].y - pos[b].y;
        const dist = Math.max(Math.hypot(dx, dy), 0.01);
        const force = (k * k) / dist;
        disp[a].x += (dx / dist) * force;
        disp[a].y += (dy / dist) * force;
        disp[b].x -= (dx / dist) * force;
        disp[b].y -= (dy / dist) * force;
      }
    }
    for (const [u, v] of edges) {
      const dx = pos[u].x - pos[v].x;
      const dy = pos[u].y - pos[v].y;
      const dist = Math.max(Math.hypot(dx, dy), 0.01);
      const force = (dist * dist) / k;
      disp[u].x -= (dx / dist) * force;
      disp[u].y -= (dy / dist) * force;
      disp[v].x += (dx / dist) * force;
      disp[v].y += (dy / dist) * force;
    }
    for (const n of nodes) {
      const d = Math.max(Math.hypot(disp[n].x, disp[n].y), 0.01);
      const step = Math.min(d, 12 * cool);
      pos[n].x += (disp[n].x / d) * step;
      pos[n].y += (disp[n].y / d) * step;
      pos[n].x = Math.min(width - 40, Math.max(40, pos[n].x));
      pos[n].y = Math.min(height - 30, Math.max(30, pos[n].y));
    }
  }
  return pos;
}
