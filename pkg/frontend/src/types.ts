/** Payload shapes of the causalwhy HTTP API. */

export type Mark = 'tail' | 'arrow' | 'circle';

export interface GraphEdge {
  u: string;
  v: string;
  mark_u: Mark;
  mark_v: Mark;
}

export interface GraphJson {
  nodes: string[];
  edges: GraphEdge[];
  fd_edges?: [string, string][];
  sepsets?: Record<string, string[]>;
}

export interface UploadResponse {
  id: string;
  schema: {
    columns: { name: string; kind: 'dimension' | 'measure' }[];
    rows: number;
  };
}

export interface ExplanationJson {
  type: 'causal' | 'non_causal';
  dimension: string;
  values: string[];
  range: { lo: number; hi: number } | null;
  responsibility: number;
  score: number;
  contingency: string[];
  delta_before: number;
  delta_after: number;
}

export type Semantics = 'causal' | 'non_causal' | 'no_explainability';

export interface WhyResponse {
  delta: number;
  swapped: boolean;
  epsilon: number;
  explanations: ExplanationJson[];
  semantics: Record<string, { semantics: Semantics; rule: string }>;
}

export interface WhyRequest {
  measure: string;
  agg: 'SUM' | 'AVG';
  foreground: { dim: string; v1: string; v2: string };
  background: { dim: string; value: string }[];
  epsilon_frac?: number;
  top?: number;
}
