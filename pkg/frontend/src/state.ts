/** Session state serialized into the URL hash so a reload restores the view
 * from the API alone (graph via GET, last query re-issued). */

import { emptyDraft, type QueryDraft } from './queryBuilder.js';

export interface UiState {
  sessionId: string | null;
  draft: QueryDraft;
}

export function initialState(): UiState {
  return { sessionId: null, draft: emptyDraft() };
}

export function encodeState(state: UiState): string {
  const payload = JSON.stringify(state);
  // base64url keeps the hash inert
  const b64 = typeof btoa === 'function' ? btoa(payload) : Buffer.from(payload).toString('base64');
  return b64.replace(/\+/g, '-').replace(/\//g, '_').replace(/=+$/, '');
}

export function decodeState(hash: string): UiState | null {
  if (!hash) return null;
  try {
    const b64 = hash.replace(/-/g, '+').replace(/_/g, '/');
    const padded = b64 + '='.repeat((4 - (b64.length % 4)) % 4);
    const payload = typeof atob === 'function' ? atob(padded) : Buffer.from(padded, 'base64').toString();
    const parsed = JSON.parse(payload) as UiState;
    if (typeof parsed !== 'object' || parsed === null || !('draft' in parsed)) return null;
    return { sessionId: parsed.sessionId ?? null, draft: { ...emptyDraft(), ...parsed.draft } };
  } catch {
    return null;
  }
}
