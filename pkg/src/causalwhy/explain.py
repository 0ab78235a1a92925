"""Predicate-level explanation search for aggregate why-queries.

A why-query fixes a measure, an aggregate and two sibling subspaces; the gap
between the two aggregates is the quantity to explain.  Candidate
explanations are predicates on one dimension whose removal closes the gap;
their responsibility is one over one plus the (normalized) gap reduction a
contingency must contribute on top of the predicate itself.

The SUM optimizer is exact over the canonical prefix in O(m log m); the AVG
optimizer is a greedy O(m^2) heuristic; the brute-force search is the
oracle for both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tabular
from .semantics import CAUSAL, NO_EXPLAINABILITY, NON_CAUSAL, translate
from .mixedgraph import m_separated_possibly
from .tabular import Filter, Predicate, Subspace

COUNTERFACTUAL = "counterfactual"
ACTUAL = "actual"
NEITHER = "neither"

BRUTE_FORCE_CAP = 15
DEFAULT_EPSILON_FRAC = 0.1


class QueryError(ValueError):
    pass


class DegenerateQueryError(QueryError):
    """The query (or a removal) empties a sibling subspace under AVG."""


@dataclass(frozen=True)
class WhyQuery:
    measure: str
    agg: str
    foreground: str
    value_1: object
    value_2: object
    background: Subspace
    epsilon: float
    sigma: float | None
    swapped: bool

    def subspace(self, side):
        value = self.value_1 if side == 1 else self.value_2
        return Subspace(list(self.background.filters) + [Filter(self.foreground, value)])

    def background_dimensions(self):
        return self.background.dimensions()

    def to_json(self):
        return {
            "measure": self.measure,
            "agg": self.agg,
            "foreground": {"dim": self.foreground, "v1": str(self.value_1), "v2": str(self.value_2)},
            "background": [{"dim": f.dimension, "value": str(f.value)} for f in self.background.filters],
            "epsilon": self.epsilon,
            "sigma": self.sigma,
            "swapped": self.swapped,
        }


def make_query(
    d,
    measure,
    agg,
    foreground,
    value_1,
    value_2,
    background=(),
    epsilon=None,
    epsilon_frac=DEFAULT_EPSILON_FRAC,
    sigma=None,
):
    """Build a why-query, orienting it so the gap is non-negative.

    ``epsilon`` defaults to ``epsilon_frac`` times the gap.  ``sigma`` above 1
    would make even a single filter unprofitable and is rejected.
    """
    agg = agg.upper()
    if agg not in ("SUM", "AVG"):
        raise QueryError(f"unsupported aggregate: {agg}")
    if value_1 == value_2:
        raise QueryError("foreground values must differ")
    if sigma is not None and (sigma <= 0 or sigma > 1):
        raise QueryError("sigma must be in (0, 1]")
    col = d.column(foreground)
    if col.kind != tabular.DIMENSION:
        raise QueryError(f"{foreground} is not a dimension")
    if d.column(measure).kind != tabular.MEASURE:
        raise QueryError(f"{measure} is not a measure")
    background = Subspace(background) if not isinstance(background, Subspace) else background
    if foreground in background.dimensions():
        raise QueryError("foreground cannot also be a background dimension")

    swapped = False
    probe = WhyQuery(measure, agg, foreground, value_1, value_2, background, 0.0, sigma, False)
    gap = eval_delta(d, probe)
    if gap < 0:
        value_1, value_2 = value_2, value_1
        gap = -gap
        swapped = True
    eps = float(epsilon) if epsilon is not None else float(epsilon_frac) * gap
    return WhyQuery(measure, agg, foreground, value_1, value_2, background, eps, sigma, swapped)


def eval_delta(d, q, removed=()):
    """The query gap over ``d`` minus the union of the removed predicates."""
    keep = np.ones(d.row_count, dtype=bool)
    for pred in removed:
        keep &= ~d.mask_for(pred)
    m1 = d.mask_for(q.subspace(1)) & keep
    m2 = d.mask_for(q.subspace(2)) & keep
    values = d.measure_values(q.measure)
    if q.agg == "SUM":
        return float(values[m1].sum() - values[m2].sum())
    if not m1.any() or not m2.any():
        raise DegenerateQueryError("AVG over an emptied sibling subspace")
    return float(values[m1].mean() - values[m2].mean())


# -- per-dimension decomposition ----------------------------------------------


@dataclass
class DeltaDecomposition:
    """Per-filter breakdown of the gap on one dimension.

    ``a``/``b`` count rows of each filter inside the two sibling subspaces,
    ``sx``/``sy`` are the measure sums there; everything any optimizer needs
    is then O(1) per candidate.
    """

    dimension: str
    values: list
    a: np.ndarray
    b: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    total_a: int
    total_b: int
    total_sx: float
    total_sy: float
    agg: str
    deltas: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.agg == "SUM":
            self.deltas = self.sx - self.sy
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                self.deltas = np.where(
                    (self.a > 0) & (self.b > 0),
                    self.sx / np.maximum(self.a, 1) - self.sy / np.maximum(self.b, 1),
                    np.nan,
                )

    @property
    def delta_total(self):
        if self.agg == "SUM":
            return float(self.total_sx - self.total_sy)
        return float(self.total_sx / self.total_a - self.total_sy / self.total_b)

    def candidate_indices(self):
        return [i for i in range(len(self.values)) if self.a[i] + self.b[i] > 0]

    def delta_without(self, idx):
        """Gap after removing the filters at ``idx``; None when undefined."""
        idx = list(idx)
        ra = self.total_a - int(self.a[idx].sum())
        rb = self.total_b - int(self.b[idx].sum())
        rsx = self.total_sx - float(self.sx[idx].sum())
        rsy = self.total_sy - float(self.sy[idx].sum())
        if self.agg == "SUM":
            return rsx - rsy
        if ra <= 0 or rb <= 0:
            return None
        return rsx / ra - rsy / rb

    def delta_on(self, idx):
        """Gap restricted to the rows matching the filters at ``idx``."""
        idx = list(idx)
        pa = int(self.a[idx].sum())
        pb = int(self.b[idx].sum())
        psx = float(self.sx[idx].sum())
        psy = float(self.sy[idx].sum())
        if self.agg == "SUM":
            return psx - psy
        if pa <= 0 or pb <= 0:
            return None
        return psx / pa - psy / pb

    def predicate(self, idx):
        return Predicate(self.dimension, [self.values[i] for i in idx])


def decompose(d, q, dimension):
    col = d.column(dimension)
    if col.kind != tabular.DIMENSION:
        raise QueryError(f"{dimension} is not a dimension")
    if dimension == q.foreground or dimension in q.background_dimensions():
        raise QueryError(f"{dimension} is part of the query context")
    m1 = d.mask_for(q.subspace(1))
    m2 = d.mask_for(q.subspace(2))
    codes = col.codes
    values = d.measure_values(q.measure)
    card = col.cardinality
    a = np.bincount(codes[m1], minlength=card)
    b = np.bincount(codes[m2], minlength=card)
    sx = np.bincount(codes[m1], weights=values[m1], minlength=card)
    sy = np.bincount(codes[m2], weights=values[m2], minlength=card)
    if q.agg == "AVG" and (a.sum() == 0 or b.sum() == 0):
        raise DegenerateQueryError("AVG over an empty sibling subspace")
    return DeltaDecomposition(
        dimension=dimension,
        values=list(col.categories),
        a=a,
        b=b,
        sx=sx,
        sy=sy,
        total_a=int(m1.sum()),
        total_b=int(m2.sum()),
        total_sx=float(values[m1].sum()),
        total_sy=float(values[m2].sum()),
        agg=q.agg,
    )


# -- causality and responsibility ----------------------------------------------


def _as_indices(dec, predicate):
    lookup = {v: i for i, v in enumerate(dec.values)}
    idx = []
    for v in predicate.values:
        if v not in lookup:
            raise QueryError(f"{v} not in domain of {dec.dimension}")
        idx.append(lookup[v])
    return sorted(idx)


def check_w_causality(d, q, predicate, contingency=None):
    """Classify a predicate as counterfactual cause, actual cause or neither."""
    dec = decompose(d, q, predicate.dimension)
    p_idx = _as_indices(dec, predicate)
    g_idx = _as_indices(dec, contingency) if contingency else []
    if set(p_idx) & set(g_idx):
        raise QueryError("predicate and contingency overlap")
    base = dec.delta_without([])
    after_p = dec.delta_without(p_idx)
    if after_p is not None and base > q.epsilon and after_p <= q.epsilon:
        return COUNTERFACTUAL
    after_g = dec.delta_without(g_idx)
    after_both = dec.delta_without(p_idx + g_idx)
    if (
        after_g is not None
        and after_both is not None
        and after_both <= q.epsilon < after_g
    ):
        return ACTUAL
    return NEITHER


def contingency_weight(d, q, predicate, contingency):
    """|Γ|_W: normalized gap reduction contributed by the contingency."""
    dec = decompose(d, q, predicate.dimension)
    p_idx = _as_indices(dec, predicate)
    g_idx = _as_indices(dec, contingency) if contingency else []
    base = dec.delta_total
    after_p = dec.delta_without(p_idx)
    after_both = dec.delta_without(p_idx + g_idx)
    if after_p is None or after_both is None:
        raise DegenerateQueryError("removal empties a sibling subspace")
    return max((after_p - after_both) / base, 0.0)


def responsibility(d, q, predicate, contingency=None):
    """Responsibility lower bound induced by one valid contingency."""
    kind = check_w_causality(d, q, predicate, contingency)
    if contingency is None or not contingency.values:
        if kind != COUNTERFACTUAL:
            raise QueryError("empty contingency requires a counterfactual cause")
        return 1.0
    if kind == NEITHER:
        raise QueryError("contingency is not valid for this predicate")
    if kind == COUNTERFACTUAL:
        return 1.0
    return 1.0 / (1.0 + contingency_weight(d, q, predicate, contingency))


# -- explanations ----------------------------------------------------------------


@dataclass(frozen=True)
class Explanation:
    kind: str  # causal | non_causal
    dimension: str
    predicate: Predicate
    responsibility: float
    contingency: Predicate | None
    score: float
    delta_before: float
    delta_after: float
    value_range: tuple | None = None

    def to_json(self):
        return {
            "type": self.kind,
            "dimension": self.dimension,
            "values": [str(v) for v in sorted(self.predicate.values, key=str)],
            "range": {"lo": self.value_range[0], "hi": self.value_range[1]} if self.value_range else None,
            "responsibility": self.responsibility,
            "score": self.score,
            "contingency": [str(v) for v in sorted(self.contingency.values, key=str)] if self.contingency else [],
            "delta_before": self.delta_before,
            "delta_after": self.delta_after,
        }


def _sigma_for(q, m):
    if q.sigma is not None:
        return q.sigma
    return 1.0 / max(m, 1)


def optimize_sum(d, q, dimension, dec=None):
    """Closed-form optimum over the canonical prefix for SUM queries.

    Filters sorted by their gap share; the canonical prefix is the shortest
    that drives the gap under epsilon; within it, exactly the filters whose
    share clears the conciseness threshold are kept.
    """
    if q.agg != "SUM":
        raise QueryError("optimize_sum requires a SUM query")
    dec = dec or decompose(d, q, dimension)
    delta_d = dec.delta_total
    if delta_d <= q.epsilon:
        raise QueryError("query gap is below epsilon; nothing to explain")
    candidates = dec.candidate_indices()
    m = len(candidates)
    sigma = _sigma_for(q, m)

    positive = [i for i in candidates if dec.deltas[i] > 0]
    order = sorted(positive, key=lambda i: (-dec.deltas[i], i))
    cum = 0.0
    canonical = []
    for i in order:
        canonical.append(i)
        cum += float(dec.deltas[i])
        if delta_d - cum <= q.epsilon:
            break
    else:
        return None  # positive filters cannot close the gap
    tau = cum
    ratio = tau / delta_d
    c3 = sigma * delta_d / (1.0 + ratio) ** 2
    chosen = [i for i in canonical if dec.deltas[i] > c3]
    if not chosen:
        return None
    rest = [i for i in canonical if i not in chosen]
    delta_p = float(sum(dec.deltas[i] for i in chosen))
    rho = 1.0 / (1.0 + max(tau - delta_p, 0.0) / delta_d)
    score = rho - sigma * len(chosen)
    return Explanation(
        kind=NON_CAUSAL,
        dimension=dec.dimension,
        predicate=dec.predicate(chosen),
        responsibility=rho,
        contingency=dec.predicate(rest) if rest else None,
        score=score,
        delta_before=delta_d,
        delta_after=float(dec.delta_without(chosen)),
    )


def optimize_avg(d, q, dimension, homogeneous=False, dec=None):
    """Greedy canonical-prefix construction for AVG queries.

    Each round inserts the filter whose removal shrinks the residual gap the
    most; under homogeneity, filters whose own gap does not exceed the
    residual cannot help and are pruned.  The best scoring prefix wins.
    """
    if q.agg != "AVG":
        raise QueryError("optimize_avg requires an AVG query")
    dec = dec or decompose(d, q, dimension)
    delta_d = dec.delta_total
    if delta_d <= q.epsilon:
        raise QueryError("query gap is below epsilon; nothing to explain")
    candidates = dec.candidate_indices()
    m = len(candidates)
    sigma = _sigma_for(q, m)
    max_rounds = min(m, int(math.floor(1.0 / sigma)))

    chosen = []
    residual = delta_d
    for _ in range(max_rounds):
        if residual <= q.epsilon:
            break
        remaining = [i for i in candidates if i not in chosen]
        if homogeneous:
            # filters whose own gap does not exceed the residual cannot
            # shrink it under homogeneity
            pool = [
                i
                for i in remaining
                if not np.isnan(dec.deltas[i]) and dec.deltas[i] > residual
            ]
            if not pool:
                break
        else:
            pool = remaining
        best_i, best_after = None, None
        for i in pool:
            after = dec.delta_without(chosen + [i])
            if after is None:
                continue
            if best_after is None or after < best_after:
                best_i, best_after = i, after
        if best_i is None:
            break
        chosen.append(best_i)
        residual = best_after
    if residual > q.epsilon or not chosen:
        return None

    best = None
    for k in range(1, len(chosen) + 1):
        prefix = chosen[:k]
        rest = chosen[k:]
        after_prefix = dec.delta_without(prefix)
        if after_prefix is None:
            continue
        if rest:
            weight = max((after_prefix - residual) / delta_d, 0.0)
            rho = 1.0 / (1.0 + weight)
        else:
            rho = 1.0
        score = rho - sigma * k
        if best is None or score > best[0]:
            best = (score, k, rho)
    if best is None:
        return None
    score, k, rho = best
    prefix, rest = chosen[:k], chosen[k:]
    return Explanation(
        kind=NON_CAUSAL,
        dimension=dec.dimension,
        predicate=dec.predicate(prefix),
        responsibility=rho,
        contingency=dec.predicate(rest) if rest else None,
        score=score,
        delta_before=delta_d,
        delta_after=float(dec.delta_without(prefix)),
    )


def brute_force(d, q, dimension, cap=BRUTE_FORCE_CAP, dec=None):
    """Exhaustive optimum: every predicate, every contingency, exact
    responsibility.  The oracle the fast paths are checked against."""
    dec = dec or decompose(d, q, dimension)
    candidates = dec.candidate_indices()
    m = len(candidates)
    if m > cap:
        raise QueryError(f"brute force capped at {cap} filters, got {m}")
    delta_d = dec.delta_total
    if delta_d <= q.epsilon:
        raise QueryError("query gap is below epsilon; nothing to explain")
    sigma = _sigma_for(q, m)

    # subset sums over bitmasks
    size = 1 << m
    a = np.zeros(size)
    b = np.zeros(size)
    sx = np.zeros(size)
    sy = np.zeros(size)
    for j, i in enumerate(candidates):
        bit = 1 << j
        rng = np.arange(bit)
        a[bit : 2 * bit] = a[rng] + dec.a[i]
        b[bit : 2 * bit] = b[rng] + dec.b[i]
        sx[bit : 2 * bit] = sx[rng] + dec.sx[i]
        sy[bit : 2 * bit] = sy[rng] + dec.sy[i]
    if q.agg == "SUM":
        removed = (dec.total_sx - sx) - (dec.total_sy - sy)
    else:
        ra = dec.total_a - a
        rb = dec.total_b - b
        with np.errstate(divide="ignore", invalid="ignore"):
            removed = np.where((ra > 0) & (rb > 0), (dec.total_sx - sx) / np.maximum(ra, 1e-300) - (dec.total_sy - sy) / np.maximum(rb, 1e-300), np.nan)

    eps = q.epsilon
    full = size - 1
    best = None  # (score, |P|, mask, rho, gamma_mask)
    for p_mask in range(1, size):
        after_p = removed[p_mask]
        if math.isnan(after_p):
            continue
        rho, gamma_best = 0.0, None
        if after_p <= eps:
            rho, gamma_best = 1.0, 0
        else:
            comp = full & ~p_mask
            best_w = None
            sub = comp
            while sub:
                both = removed[p_mask | sub]
                alone = removed[sub]
                if not (math.isnan(both) or math.isnan(alone)) and both <= eps < alone:
                    w = max((after_p - both) / delta_d, 0.0)
                    if best_w is None or w < best_w:
                        best_w = w
                        gamma_best = sub
                sub = (sub - 1) & comp
            if best_w is not None:
                rho = 1.0 / (1.0 + best_w)
        if rho <= 0.0:
            continue
        n_p = bin(p_mask).count("1")
        score = rho - sigma * n_p
        key = (score, -n_p, -p_mask)
        if best is None or key > (best[0], -best[1], -best[2]):
            best = (score, n_p, p_mask, rho, gamma_best)
    if best is None:
        return None
    score, n_p, p_mask, rho, gamma_mask = best
    p_idx = [candidates[j] for j in range(m) if p_mask >> j & 1]
    g_idx = [candidates[j] for j in range(m) if gamma_mask >> j & 1] if gamma_mask else []
    return Explanation(
        kind=NON_CAUSAL,
        dimension=dec.dimension,
        predicate=dec.predicate(p_idx),
        responsibility=float(rho),
        contingency=dec.predicate(g_idx) if g_idx else None,
        score=float(score),
        delta_before=delta_d,
        delta_after=float(removed[p_mask]),
    )


def exact_score(d, q, dimension, predicate, dec=None):
    """Score of a predicate under the exact (brute-force) responsibility."""
    dec = dec or decompose(d, q, dimension)
    candidates = dec.candidate_indices()
    sigma = _sigma_for(q, len(candidates))
    p_idx = _as_indices(dec, predicate)
    after_p = dec.delta_without(p_idx)
    delta_d = dec.delta_total
    if after_p is not None and after_p <= q.epsilon:
        return 1.0 - sigma * len(p_idx)
    others = [i for i in candidates if i not in p_idx]
    best_w = None
    for mask in range(1, 1 << len(others)):
        g_idx = [others[j] for j in range(len(others)) if mask >> j & 1]
        both = dec.delta_without(p_idx + g_idx)
        alone = dec.delta_without(g_idx)
        if both is None or alone is None:
            continue
        if both <= q.epsilon < alone:
            w = max((after_p - both) / delta_d, 0.0)
            if best_w is None or w < best_w:
                best_w = w
    if best_w is None:
        return None
    return 1.0 / (1.0 + best_w) - sigma * len(p_idx)


# -- homogeneity and the full pipeline --------------------------------------------


def is_homogeneous(g, q, dimension):
    """Whether the sibling subspaces are homogeneous on ``dimension``: the
    dimension and the foreground are separated given the backgrounds."""
    graph = g.graph if hasattr(g, "graph") else g
    if dimension == q.foreground:
        return False
    return m_separated_possibly(graph, dimension, q.foreground, set(q.background_dimensions()))


def _merge_range(dec, predicate):
    """Closed numeric range when the selected bins form one contiguous run."""
    values = [v for v in dec.values]
    chosen = sorted(_as_indices(dec, predicate))
    if not all(isinstance(values[i], tabular.BinLabel) for i in chosen):
        return None
    if chosen != list(range(chosen[0], chosen[-1] + 1)):
        return None
    return (values[chosen[0]].lo, values[chosen[-1]].hi)


def explain(d, g, q, bins=5, optimizer_cap=None):
    """Ranked explanations for a why-query against a learned graph.

    Variables separated from the measure by the context are skipped; the
    rest run the aggregate-matched optimizer on their filters (measures on
    their range bins) and are ranked by score, causal first on ties.
    """
    semantics = translate(g, q.measure, q.foreground, q.background_dimensions())
    order = {name: i for i, name in enumerate(d.column_order)}

    work = d
    results = []
    for var in sorted(semantics, key=lambda v: order.get(v, len(order))):
        sem = semantics[var]
        if sem.semantics == NO_EXPLAINABILITY:
            continue
        if var not in d:
            continue
        col = d.column(var)
        if col.kind == tabular.MEASURE:
            bin_col = tabular.bin_column_name(var)
            if bin_col not in work:
                work = tabular.discretize(work, var, bins=bins)
            target_dim = bin_col
        else:
            target_dim = var
        try:
            dec = decompose(work, q, target_dim)
            if q.agg == "SUM":
                exp = optimize_sum(work, q, target_dim, dec=dec)
            else:
                exp = optimize_avg(work, q, target_dim, homogeneous=is_homogeneous(g, q, var), dec=dec)
        except (QueryError, tabular.TabularError):
            continue
        if exp is None:
            continue
        kind = CAUSAL if sem.semantics == CAUSAL else NON_CAUSAL
        results.append(
            Explanation(
                kind=kind,
                dimension=var,
                predicate=exp.predicate,
                responsibility=exp.responsibility,
                contingency=exp.contingency,
                score=exp.score,
                delta_before=exp.delta_before,
                delta_after=exp.delta_after,
                value_range=_merge_range(dec, exp.predicate),
            )
        )
    results.sort(
        key=lambda e: (
            -e.score,
            0 if e.kind == CAUSAL else 1,
            order.get(e.dimension, len(order)),
        )
    )
    return results
