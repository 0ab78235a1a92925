/** Browser entry point: wires the upload form, the query builder and the
 * graph/explanation views to the API. */

import { ApiClient, ApiError } from './api.js';
import { renderExplanationList } from './explanationView.js';
import { renderGraphSvg } from './graphView.js';
import { canSubmit, emptyDraft, toRequest, validateDraft, type QueryDraft } from './queryBuilder.js';
import { decodeState, encodeState, type UiState } from './state.js';
import type { GraphJson, UploadResponse, WhyResponse } from './types.js';

const api = new ApiClient('');

interface AppContext {
  state: UiState;
  schema: UploadResponse['schema'] | null;
  graph: GraphJson | null;
  lastWhy: WhyResponse | null;
}

const ctx: AppContext = { state: { sessionId: null, draft: emptyDraft() }, schema: null, graph: null, lastWhy: null };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setStatus(message: string, isError = false) {
  const node = el<HTMLDivElement>('status');
  node.textContent = message;
  node.className = isError ? 'status error' : 'status';
}

function syncHash() {
  window.location.hash = encodeState(ctx.state);
}

function redrawGraph() {
  const host = el<HTMLDivElement>('graph-view');
  if (!ctx.graph) {
    host.innerHTML = '<div class="placeholder">upload data and learn a graph</div>';
    return;
  }
  host.innerHTML = renderGraphSvg(ctx.graph, {
    semantics: ctx.lastWhy?.semantics,
    measure: ctx.state.draft.measure ?? undefined,
    foreground: ctx.state.draft.foregroundDim ?? undefined,
  });
  for (const node of host.querySelectorAll<SVGGElement>('g.node')) {
    node.addEventListener('click', () => {
      const rule = node.dataset.rule;
      const role = node.dataset.role;
      setStatus(
        rule
          ? `${node.dataset.node}: ${role} (classification rule ${rule})`
          : `${node.dataset.node}: ${role}`,
      );
    });
  }
}

function redrawForm() {
  const draft = ctx.state.draft;
  const measureSel = el<HTMLSelectElement>('measure');
  const dimSel = el<HTMLSelectElement>('foreground');
  if (ctx.schema) {
    measureSel.innerHTML = ctx.schema.columns
      .filter((c) => c.kind === 'measure')
      .map((c) => `<option ${c.name === draft.measure ? 'selected' : ''}>${c.name}</option>`)
      .join('');
    dimSel.innerHTML = ctx.schema.columns
      .filter((c) => c.kind === 'dimension')
      .map((c) => `<option ${c.name === draft.foregroundDim ? 'selected' : ''}>${c.name}</option>`)
      .join('');
  }
  el<HTMLInputElement>('value1').value = draft.value1 ?? '';
  el<HTMLInputElement>('value2').value = draft.value2 ?? '';
  el<HTMLSelectElement>('agg').value = draft.agg;
  const problems = validateDraft(draft, ctx.schema ?? undefined);
  el<HTMLButtonElement>('submit-why').disabled = problems.length > 0 || !ctx.graph;
  el<HTMLDivElement>('draft-problems').textContent = problems.map((p) => p.message).join('; ');
}

function readDraft(): QueryDraft {
  return {
    ...ctx.state.draft,
    measure: el<HTMLSelectElement>('measure').value || null,
    agg: el<HTMLSelectElement>('agg').value as 'SUM' | 'AVG',
    foregroundDim: el<HTMLSelectElement>('foreground').value || null,
    value1: el<HTMLInputElement>('value1').value || null,
    value2: el<HTMLInputElement>('value2').value || null,
  };
}

async function restoreFromHash() {
  const restored = decodeState(window.location.hash.slice(1));
  if (!restored || !restored.sessionId) return;
  ctx.state = restored;
  try {
    ctx.graph = await api.graph(restored.sessionId);
    setStatus(`restored session ${restored.sessionId}`);
    if (canSubmit(restored.draft)) {
      ctx.lastWhy = await api.why(restored.sessionId, toRequest(restored.draft));
      el<HTMLDivElement>('explanations').innerHTML = renderExplanationList(ctx.lastWhy);
    }
  } catch (err) {
    setStatus(err instanceof ApiError ? err.message : String(err), true);
  }
  redrawGraph();
  redrawForm();
}

export function main() {
  el<HTMLInputElement>('csv-file').addEventListener('change', async (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      setStatus('uploading…');
      const up = await api.uploadCsv(file.name, file);
      ctx.state.sessionId = up.id;
      ctx.schema = up.schema;
      ctx.graph = null;
      ctx.lastWhy = null;
      setStatus(`uploaded ${file.name}: ${up.schema.rows} rows, session ${up.id}`);
      syncHash();
      redrawGraph();
      redrawForm();
    } catch (err) {
      setStatus(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  el<HTMLButtonElement>('learn-btn').addEventListener('click', async () => {
    if (!ctx.state.sessionId) {
      setStatus('upload a CSV first', true);
      return;
    }
    try {
      setStatus('learning the causal graph…');
      ctx.graph = await api.learn(ctx.state.sessionId, {});
      setStatus(`graph ready: ${ctx.graph.nodes.length} nodes, ${ctx.graph.edges.length} edges`);
      redrawGraph();
      redrawForm();
    } catch (err) {
      setStatus(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  el<HTMLButtonElement>('submit-why').addEventListener('click', async () => {
    ctx.state.draft = readDraft();
    syncHash();
    if (!ctx.state.sessionId) return;
    try {
      setStatus('searching explanations…');
      ctx.lastWhy = await api.why(ctx.state.sessionId, toRequest(ctx.state.draft));
      el<HTMLDivElement>('explanations').innerHTML = renderExplanationList(ctx.lastWhy);
      setStatus(`Δ=${ctx.lastWhy.delta.toFixed(3)}; ${ctx.lastWhy.explanations.length} explanations`);
      redrawGraph();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        setStatus('learn a graph first', true);
      } else {
        setStatus(err instanceof ApiError ? err.message : String(err), true);
      }
    }
  });

  for (const id of ['measure', 'foreground', 'value1', 'value2', 'agg']) {
    el(id).addEventListener('change', () => {
      ctx.state.draft = readDraft();
      syncHash();
      redrawForm();
    });
  }

  void restoreFromHash();
}

if (typeof document !== 'undefined' && document.readyState !== 'loading') {
  main();
} else if (typeof document !== 'undefined') {
  document.addEventListener('DOMContentLoaded', main);
}
