"""Causal discovery over multi-dimensional data with deterministic
functional dependencies and latent confounders.

Three stages: FD-bearing variables are first connected to a single parent by
walking the FD graph bottom-up (faithfulness does not hold for them), the
remaining variables go through constraint-based skeleton learning and
orientation, and finally the FD edges are oriented along the dependency
direction.  The result is a partial ancestral graph augmented with the FD
edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

from . import tabular
from .independence import DEFAULT_ALPHA, ci_test
from .mixedgraph import (
    ARROW,
    CIRCLE,
    TAIL,
    MixedGraph,
    ext_d_sep,
    find_discriminating_paths,
    find_uncovered_circle_paths,
    find_uncovered_pd_paths,
    graph_to_json,
)


class DiscoveryError(ValueError):
    pass


@dataclass
class LearnerConfig:
    alpha: float = DEFAULT_ALPHA
    max_cond_size: int = 3
    bins: int = 5
    path_cap: int | None = None
    ci_method: str = "gsq"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DiscoveryError("alpha must be in (0, 1)")
        if self.max_cond_size < 0:
            raise DiscoveryError("max_cond_size must be >= 0")


@dataclass
class AugmentedPag:
    graph: MixedGraph
    fd_oriented_edges: set = field(default_factory=set)
    sepsets: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self):
        obj = graph_to_json(self.graph)
        obj["fd_edges"] = sorted([list(e) for e in self.fd_oriented_edges])
        obj["sepsets"] = {
            ",".join(sorted(pair, key=str)): sorted(s, key=str)
            for pair, s in self.sepsets.items()
        }
        return obj

    def to_json_str(self):
        return json.dumps(self.to_json(), sort_keys=False)

    @classmethod
    def from_json(cls, obj):
        from .mixedgraph import graph_from_json

        if isinstance(obj, str):
            obj = json.loads(obj)
        graph = graph_from_json(obj)
        fd_edges = {tuple(e) for e in obj.get("fd_edges", [])}
        sepsets = {}
        for key, s in obj.get("sepsets", {}).items():
            a, b = key.split(",", 1)
            sepsets[frozenset((a, b))] = set(s)
        prov = {}
        for u, v, _, _ in graph.edges():
            prov[(u, v)] = "fd" if (u, v) in fd_edges or (v, u) in fd_edges else "fci"
        return cls(graph=graph, fd_oriented_edges=fd_edges, sepsets=sepsets, provenance=prov)


# -- stage 1: FD skeleton ----------------------------------------------------


def stage1_fd_skeleton(fd, d):
    """Connect each non-root FD node to its lowest-cardinality parent.

    Nodes are peeled off deepest-first; ties break on dataset column order.
    Returns the partial skeleton plus the variables that remain for
    constraint-based learning (FD roots and all non-FD columns).
    """
    order = {name: i for i, name in enumerate(d.column_order)}

    def col_order(name):
        return order.get(name, len(order))

    s2 = MixedGraph(fd.nodes)
    alive = set(fd.nodes)
    edges = set(fd.edges)

    def parents_of(x):
        return sorted({u for (u, v) in edges if v == x and u in alive}, key=col_order)

    while True:
        non_roots = [n for n in alive if any(v == n for (_, v) in edges)]
        if not non_roots:
            break
        deepest = max(fd.depth.get(n, 0) for n in non_roots)
        x = min((n for n in non_roots if fd.depth.get(n, 0) == deepest), key=col_order)
        parents = parents_of(x)
        if not parents:
            raise DiscoveryError(f"non-root FD node {x} lost all parents")
        y = min(parents, key=lambda p: (d.column(p).cardinality, col_order(p)))
        s2.add_edge(x, y, CIRCLE, CIRCLE)
        alive.discard(x)
        edges = {(u, v) for (u, v) in edges if u != x and v != x}

    fd_nodes = set(fd.nodes)
    remaining = [n for n in d.column_order if n not in fd_nodes and n not in set(fd.redundant)]
    remaining += sorted(alive, key=col_order)
    remaining = sorted(set(remaining), key=col_order)
    return s2, remaining


def orient_fd_edges(s2, fd):
    """Turn each stage-1 skeleton edge into a directed edge along its FD."""
    g = s2.copy()
    for u, v, _, _ in s2.edges():
        if (u, v) in fd.edges:
            g.set_mark(u, v, u, TAIL)
            g.set_mark(u, v, v, ARROW)
        elif (v, u) in fd.edges:
            g.set_mark(u, v, v, TAIL)
            g.set_mark(u, v, u, ARROW)
        else:
            raise DiscoveryError(f"skeleton edge {u}-{v} has no FD counterpart")
    return g


# -- stage 2: constraint-based skeleton --------------------------------------


class _CiCache:
    def __init__(self, d, cfg):
        self.d = d
        self.cfg = cfg
        self.cache = {}

    def independent(self, x, y, s):
        key = (x, y, frozenset(s)) if x <= y else (y, x, frozenset(s))
        if key not in self.cache:
            res = ci_test(self.d, key[0], key[1], sorted(key[2]), alpha=self.cfg.alpha, method=self.cfg.ci_method)
            self.cache[key] = res.independent
        return self.cache[key]


def fci_skeleton(d, variables, cfg=None, tester=None):
    """Level-wise edge removal with a Possible-D-SEP pruning pass.

    Deletions within a level are batched against the level-start adjacency so
    the outcome does not depend on test order.  Returns an all-circle graph
    and the recorded separating sets.
    """
    cfg = cfg or LearnerConfig()
    variables = sorted(variables)
    tester = tester or _CiCache(d, cfg)
    adj = {v: set(variables) - {v} for v in variables}
    sepsets = {}

    level = 0
    while level <= cfg.max_cond_size:
        pairs = [
            (x, y)
            for x in variables
            for y in sorted(adj[x])
            if len(adj[x] - {y}) >= level
        ]
        if not pairs:
            break
        frozen = {v: frozenset(adj[v]) for v in variables}
        removals = {}
        for x, y in pairs:
            pk = frozenset((x, y))
            if pk in removals:
                continue
            candidates = sorted(frozen[x] - {y})
            for s in combinations(candidates, level):
                if tester.independent(x, y, s):
                    removals[pk] = set(s)
                    break
        for pk, s in removals.items():
            x, y = sorted(pk)
            adj[x].discard(y)
            adj[y].discard(x)
            sepsets[pk] = s
        level += 1

    # v-structure pre-orientation so Possible-D-SEP sees the colliders
    pre = MixedGraph(variables)
    for x in variables:
        for y in sorted(adj[x]):
            if x < y:
                pre.add_edge(x, y, CIRCLE, CIRCLE)
    _orient_v_structures(pre, sepsets)

    for x in variables:
        for y in sorted(adj[x]):
            if x > y or not pre.adjacent(x, y):
                continue
            pds = sorted(ext_d_sep(pre, x, y) - {x, y})
            removed = False
            for size in range(1, cfg.max_cond_size + 1):
                for s in combinations(pds, size):
                    if tester.independent(x, y, s):
                        sepsets[frozenset((x, y))] = set(s)
                        removed = True
                        break
                if removed:
                    break
            if removed:
                pre.remove_edge(x, y)
                adj[x].discard(y)
                adj[y].discard(x)

    skeleton = MixedGraph(variables)
    for x in variables:
        for y in sorted(adj[x]):
            if x < y:
                skeleton.add_edge(x, y, CIRCLE, CIRCLE)
    return skeleton, sepsets


# -- stage 2: orientation ------------------------------------------------------


def _orient_mark(g, u, v, at, mark):
    """Orient a circle; established arrows/tails are never overwritten."""
    if g.mark_at(u, v, at) == CIRCLE and g.mark_at(u, v, at) != mark:
        g.set_mark(u, v, at, mark)
        return True
    return False


def _unshielded_triples(g):
    out = []
    for b in sorted(g.nodes, key=str):
        nbrs = sorted(g.neighbors(b), key=str)
        for a, c in combinations(nbrs, 2):
            if not g.adjacent(a, c):
                out.append((a, b, c))
    return out


def _orient_v_structures(g, sepsets):
    for a, b, c in _unshielded_triples(g):
        sep = sepsets.get(frozenset((a, c)), set())
        if b not in sep:
            _orient_mark(g, a, b, b, ARROW)
            _orient_mark(g, b, c, b, ARROW)


def _rule1(g):
    changed = False
    for a, b, c in _unshielded_triples(g):
        for (x, y) in ((a, c), (c, a)):
            if g.mark_at(x, b, b) == ARROW and g.mark_at(b, y, b) == CIRCLE:
                changed |= _orient_mark(g, b, y, b, TAIL)
                changed |= _orient_mark(g, b, y, y, ARROW)
    return changed


def _rule2(g):
    changed = False
    for a in g.nodes:
        for c in g.neighbors(a):
            if g.mark_at(a, c, c) != CIRCLE:
                continue
            for b in g.neighbors(a) & g.neighbors(c):
                chain1 = g.is_directed_edge(a, b) and g.mark_at(b, c, c) == ARROW
                chain2 = g.mark_at(a, b, b) == ARROW and g.is_directed_edge(b, c)
                if chain1 or chain2:
                    changed |= _orient_mark(g, a, c, c, ARROW)
                    break
    return changed


def _rule3(g):
    changed = False
    for a, d_, c in _unshielded_triples(g):
        if g.mark_at(a, d_, d_) != CIRCLE or g.mark_at(d_, c, d_) != CIRCLE:
            continue
        for b in sorted(g.neighbors(a) & g.neighbors(c) & g.neighbors(d_), key=str):
            if g.mark_at(a, b, b) == ARROW and g.mark_at(c, b, b) == ARROW:
                if g.mark_at(d_, b, b) == CIRCLE:
                    changed |= _orient_mark(g, d_, b, b, ARROW)
    return changed


def _rule4(g, sepsets, cap):
    changed = False
    for b in sorted(g.nodes, key=str):
        for c in sorted(g.neighbors(b), key=str):
            if g.mark_at(b, c, b) != CIRCLE:
                continue
            oriented = False
            for a in sorted(g.neighbors(b) & g.neighbors(c), key=str):
                if not g.is_directed_edge(a, c):
                    continue
                for path in find_discriminating_paths(g, (a, b, c), cap=cap):
                    start = path[0]
                    sep = sepsets.get(frozenset((start, c)), set())
                    if b in sep:
                        oriented |= _orient_mark(g, b, c, b, TAIL)
                        oriented |= _orient_mark(g, b, c, c, ARROW)
                    else:
                        oriented |= _orient_mark(g, a, b, a, ARROW)
                        oriented |= _orient_mark(g, a, b, b, ARROW)
                        oriented |= _orient_mark(g, b, c, b, ARROW)
                        oriented |= _orient_mark(g, b, c, c, ARROW)
                    if oriented:
                        break
                if oriented:
                    break
            changed |= oriented
    return changed


def _rule5(g, cap):
    changed = False
    for a, b, ma, mb in list(g.edges()):
        if not (g.adjacent(a, b) and g.mark_at(a, b, a) == CIRCLE and g.mark_at(a, b, b) == CIRCLE):
            continue
        for path in find_uncovered_circle_paths(g, a, b, cap=cap):
            if len(path) < 4:
                continue
            gamma, theta = path[1], path[-2]
            if g.adjacent(a, theta) or g.adjacent(b, gamma):
                continue
            changed |= _orient_mark(g, a, b, a, TAIL)
            changed |= _orient_mark(g, a, b, b, TAIL)
            for i in range(len(path) - 1):
                changed |= _orient_mark(g, path[i], path[i + 1], path[i], TAIL)
                changed |= _orient_mark(g, path[i], path[i + 1], path[i + 1], TAIL)
            break
    return changed


def _rule6(g):
    changed = False
    for b in sorted(g.nodes, key=str):
        has_undirected = any(
            g.mark_at(a, b, a) == TAIL and g.mark_at(a, b, b) == TAIL
            for a in g.neighbors(b)
        )
        if not has_undirected:
            continue
        for c in sorted(g.neighbors(b), key=str):
            if g.mark_at(b, c, b) == CIRCLE:
                changed |= _orient_mark(g, b, c, b, TAIL)
    return changed


def _rule7(g):
    changed = False
    for a, b, c in _unshielded_triples(g):
        for (x, y) in ((a, c), (c, a)):
            if g.mark_at(x, b, x) == TAIL and g.mark_at(x, b, b) == CIRCLE:
                if g.mark_at(b, y, b) == CIRCLE:
                    changed |= _orient_mark(g, b, y, b, TAIL)
    return changed


def _rule8(g):
    changed = False
    for a in sorted(g.nodes, key=str):
        for c in sorted(g.neighbors(a), key=str):
            if not (g.mark_at(a, c, a) == CIRCLE and g.mark_at(a, c, c) == ARROW):
                continue
            for b in sorted(g.neighbors(a) & g.neighbors(c), key=str):
                first = g.is_directed_edge(a, b) or (
                    g.mark_at(a, b, a) == TAIL and g.mark_at(a, b, b) == CIRCLE
                )
                if first and g.is_directed_edge(b, c):
                    changed |= _orient_mark(g, a, c, a, TAIL)
                    break
    return changed


def _rule9(g, cap):
    changed = False
    for a in sorted(g.nodes, key=str):
        for c in sorted(g.neighbors(a), key=str):
            if not (g.mark_at(a, c, a) == CIRCLE and g.mark_at(a, c, c) == ARROW):
                continue
            for path in find_uncovered_pd_paths(g, a, c, cap=cap):
                if len(path) < 3:
                    continue
                if g.adjacent(path[1], c) or path[1] == c:
                    continue
                changed |= _orient_mark(g, a, c, a, TAIL)
                break
    return changed


def _rule10(g, cap):
    changed = False
    for a in sorted(g.nodes, key=str):
        for c in sorted(g.neighbors(a), key=str):
            if not (g.mark_at(a, c, a) == CIRCLE and g.mark_at(a, c, c) == ARROW):
                continue
            parents = sorted((p for p in g.neighbors(c) if g.is_directed_edge(p, c)), key=str)
            done = False
            for b, t in combinations(parents, 2):
                p1s = find_uncovered_pd_paths(g, a, b, cap=cap)
                p2s = find_uncovered_pd_paths(g, a, t, cap=cap)
                for p1 in p1s:
                    for p2 in p2s:
                        mu, omega = p1[1], p2[1]
                        if mu != omega and not g.adjacent(mu, omega):
                            changed |= _orient_mark(g, a, c, a, TAIL)
                            done = True
                            break
                    if done:
                        break
                if done:
                    break
    return changed


def fci_orient(skeleton, sepsets, cfg=None):
    """Orient an all-circle skeleton into a PAG.

    Unshielded colliders first, then rules 1-4 to a fixpoint, then rules 5-10
    to a fixpoint.
    """
    cfg = cfg or LearnerConfig()
    cap = cfg.path_cap
    g = skeleton.copy()
    _orient_v_structures(g, sepsets)
    while True:
        changed = _rule1(g) | _rule2(g) | _rule3(g) | _rule4(g, sepsets, cap)
        if not changed:
            break
    while True:
        changed = (
            _rule5(g, cap)
            | _rule6(g)
            | _rule7(g)
            | _rule8(g)
            | _rule9(g, cap)
            | _rule10(g, cap)
        )
        if not changed:
            break
    return g


# -- full pipeline --------------------------------------------------------------


def graph_dataset(d, bins=5):
    """Dataset restricted to graph variables: dimensions stay, measures are
    replaced by their equal-frequency bins under the measure's own name."""
    work = d
    for m in d.measures:
        work = tabular.discretize(work, m, bins=bins)
    cols = []
    for name in d.column_order:
        col = d.column(name)
        if col.kind == tabular.DIMENSION:
            if name.endswith(tabular.BIN_SUFFIX):
                continue
            cols.append(work.column(name))
        else:
            binned = work.column(tabular.bin_column_name(name))
            cols.append(
                tabular.Column(name, tabular.DIMENSION, None, codes=binned.codes, categories=binned.categories)
            )
    return tabular.Dataset(cols)


def learn(d, fd=None, cfg=None):
    """Full pipeline: FD stage, constraint-based stage, FD orientation, and
    concatenation into an FD-augmented PAG."""
    cfg = cfg or LearnerConfig()
    gd = graph_dataset(d, bins=cfg.bins)
    if fd is None:
        fd = tabular.discover_fds(gd)
    s2, remaining = stage1_fd_skeleton(fd, gd)
    s1, sepsets = fci_skeleton(gd, remaining, cfg)
    g1 = fci_orient(s1, sepsets, cfg)
    g2 = orient_fd_edges(s2, fd)

    graph = MixedGraph(sorted(set(gd.column_order) - set(fd.redundant), key=gd.column_order.index))
    provenance = {}
    for u, v, mu, mv in g1.edges():
        graph.add_edge(u, v, mu, mv)
        provenance[(u, v)] = "fci"
    fd_oriented = set()
    for u, v, mu, mv in g2.edges():
        graph.add_edge(u, v, mu, mv)
        provenance[(u, v)] = "fd"
        if mu == TAIL:
            fd_oriented.add((u, v))
        else:
            fd_oriented.add((v, u))
    return AugmentedPag(graph=graph, fd_oriented_edges=fd_oriented, sepsets=sepsets, provenance=provenance)


def learn_agnostic(d, cfg=None):
    """Plain constraint-based learning that ignores functional dependencies."""
    cfg = cfg or LearnerConfig()
    gd = graph_dataset(d, bins=cfg.bins)
    s1, sepsets = fci_skeleton(gd, gd.column_order, cfg)
    g1 = fci_orient(s1, sepsets, cfg)
    prov = {(u, v): "fci" for u, v, _, _ in g1.edges()}
    return AugmentedPag(graph=g1, fd_oriented_edges=set(), sepsets=sepsets, provenance=prov)
