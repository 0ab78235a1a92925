/** Why-query draft state: what the form tracks and when it may submit. */

import type { UploadResponse, WhyRequest } from './types.js';

export interface QueryDraft {
  measure: string | null;
  agg: 'SUM' | 'AVG';
  foregroundDim: string | null;
  value1: string | null;
  value2: string | null;
  background: { dim: string; value: string }[];
  epsilonFrac: number;
  top: number | null;
}

export function emptyDraft(): QueryDraft {
  return {
    measure: null,
    agg: 'AVG',
    foregroundDim: null,
    value1: null,
    value2: null,
    background: [],
    epsilonFrac: 0.1,
    top: 10,
  };
}

export interface DraftProblem {
  field: string;
  message: string;
}

/** All reasons the draft cannot be submitted yet (empty means ready). */
export function validateDraft(draft: QueryDraft, schema?: UploadResponse['schema']): DraftProblem[] {
  const problems: DraftProblem[] = [];
  if (!draft.measure) problems.push({ field: 'measure', message: 'choose a measure' });
  if (!draft.foregroundDim) problems.push({ field: 'foreground', message: 'choose a foreground dimension' });
  if (!draft.value1 || !draft.value2) {
    problems.push({ field: 'values', message: 'pick both foreground values' });
  } else if (draft.value1 === draft.value2) {
    problems.push({ field: 'values', message: 'foreground values must differ' });
  }
  if (draft.epsilonFrac <= 0 || draft.epsilonFrac >= 1) {
    problems.push({ field: 'epsilon', message: 'epsilon fraction must be in (0, 1)' });
  }
  for (const b of draft.background) {
    if (b.dim === draft.foregroundDim) {
      problems.push({ field: 'background', message: 'background cannot repeat the foreground dimension' });
    }
  }
  if (schema) {
    const kinds = new Map(schema.columns.map((c) => [c.name, c.kind]));
    if (draft.measure && kinds.get(draft.measure) !== 'measure') {
      problems.push({ field: 'measure', message: `${draft.measure} is not a measure` });
    }
    if (draft.foregroundDim && kinds.get(draft.foregroundDim) !== 'dimension') {
      problems.push({ field: 'foreground', message: `${draft.foregroundDim} is not a dimension` });
    }
  }
  return problems;
}

export function canSubmit(draft: QueryDraft, schema?: UploadResponse['schema']): boolean {
  return validateDraft(draft, schema).length === 0;
}

export function toRequest(draft: QueryDraft): WhyRequest {
  if (!draft.measure || !draft.foregroundDim || !draft.value1 || !draft.value2) {
    throw new Error('draft is incomplete');
  }
  const req: WhyRequest = {
    measure: draft.measure,
    agg: draft.agg,
    foreground: { dim: draft.foregroundDim, v1: draft.value1, v2: draft.value2 },
    background: [...draft.background],
    epsilon_frac: draft.epsilonFrac,
  };
  if (draft.top !== null) req.top = draft.top;
  return req;
}
