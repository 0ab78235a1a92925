/** Render a ranked explanation list (responsibility bars, causal badges and
 * the before/after gap panel) as an HTML string. */

import type { ExplanationJson, WhyResponse } from './types.js';

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function formatPredicate(e: ExplanationJson): string {
  if (e.range) {
    return `${e.dimension} in [${e.range.lo}, ${e.range.hi}]`;
  }
  if (e.values.length === 1) {
    return `${e.dimension} = ${e.values[0]}`;
  }
  return `${e.dimension} in {${e.values.join(', ')}}`;
}

export function renderExplanation(e: ExplanationJson, rank: number): string {
  const badge = e.type === 'causal' ? 'causal' : 'non-causal';
  const barWidth = Math.round(e.responsibility * 100);
  const contingency = e.contingency.length
    ? `<div class="contingency">contingency: {${esc(e.contingency.join(', '))}}</div>`
    : '';
  return (
    `<li class="explanation ${badge}" data-rank="${rank}" data-dimension="${esc(e.dimension)}">` +
    `<span class="badge badge-${badge}">${badge}</span>` +
    `<span class="predicate">${esc(formatPredicate(e))}</span>` +
    `<div class="resp-bar"><div class="resp-fill" style="width:${barWidth}%"></div>` +
    `<span class="resp-value">ρ=${e.responsibility.toFixed(3)}</span></div>` +
    `<span class="score">score ${e.score.toFixed(3)}</span>` +
    `<div class="delta-panel">Δ=${e.delta_before.toFixed(3)} vs Δ'=${e.delta_after.toFixed(3)} after removal</div>` +
    contingency +
    `</li>`
  );
}

export function renderExplanationList(resp: WhyResponse): string {
  if (resp.explanations.length === 0) {
    return `<div class="empty-state">no explanation clears the threshold for this query</div>`;
  }
  const swapped = resp.swapped
    ? `<div class="note">sides were swapped so the gap is positive</div>`
    : '';
  const items = resp.explanations.map((e, i) => renderExplanation(e, i + 1)).join('');
  return (
    `<div class="why-result">` +
    `<div class="delta-summary">Δ=${resp.delta.toFixed(3)} (ε=${resp.epsilon.toFixed(3)})</div>` +
    swapped +
    `<ol class="explanations">${items}</ol>` +
    `</div>`
  );
}

/** The dimension/values the top-ranked rendered row displays; used to check
 * the rendering agrees with the raw service payload. */
export function topRendered(resp: WhyResponse): { dimension: string; values: string[] } | null {
  if (resp.explanations.length === 0) return null;
  const top = resp.explanations[0];
  return { dimension: top.dimension, values: [...top.values].sort() };
}
