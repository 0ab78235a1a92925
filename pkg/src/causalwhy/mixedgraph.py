"""Directed mixed graphs with three endpoint marks (tail, arrow, circle).

One edge type with two endpoint marks covers skeletons (circle-circle),
ancestral graphs (tail/arrow) and partial ancestral graphs.  Graphs are
treated as immutable values once built; builders mutate a private copy.
"""

from __future__ import annotations

import json
from itertools import combinations

TAIL = "tail"
ARROW = "arrow"
CIRCLE = "circle"

MARKS = (TAIL, ARROW, CIRCLE)

# beyond this many nodes, path searches are capped to keep worst cases tame
UNBOUNDED_NODE_LIMIT = 30
DEFAULT_PATH_CAP = 8


class GraphError(ValueError):
    pass


def _key(u, v):
    return (u, v) if u <= v else (v, u)


class MixedGraph:
    """Nodes plus at most one edge per pair, each end carrying a mark."""

    def __init__(self, nodes=(), edges=()):
        self._nodes = list(dict.fromkeys(nodes))
        self._node_set = set(self._nodes)
        self._edges = {}
        self._adj = {n: set() for n in self._nodes}
        for (u, v, mu, mv) in edges:
            self.add_edge(u, v, mu, mv)

    # -- construction ------------------------------------------------------

    def add_node(self, n):
        if n not in self._node_set:
            self._nodes.append(n)
            self._node_set.add(n)
            self._adj[n] = set()

    def add_edge(self, u, v, mark_u=CIRCLE, mark_v=CIRCLE):
        if u == v:
            raise GraphError("self loops not allowed")
        if mark_u not in MARKS or mark_v not in MARKS:
            raise GraphError(f"bad mark: {mark_u}/{mark_v}")
        self.add_node(u)
        self.add_node(v)
        k = _key(u, v)
        if k in self._edges:
            raise GraphError(f"duplicate edge {u}-{v}")
        if k == (u, v):
            self._edges[k] = (mark_u, mark_v)
        else:
            self._edges[k] = (mark_v, mark_u)
        self._adj[u].add(v)
        self._adj[v].add(u)

    def remove_edge(self, u, v):
        k = _key(u, v)
        if k not in self._edges:
            raise GraphError(f"no edge {u}-{v}")
        del self._edges[k]
        self._adj[u].discard(v)
        self._adj[v].discard(u)

    def set_mark(self, u, v, at, mark):
        """Set the mark at node ``at`` on edge u-v."""
        if mark not in MARKS:
            raise GraphError(f"bad mark: {mark}")
        k = _key(u, v)
        if k not in self._edges:
            raise GraphError(f"no edge {u}-{v}")
        a, b = self._edges[k]
        if at == k[0]:
            self._edges[k] = (mark, b)
        elif at == k[1]:
            self._edges[k] = (a, mark)
        else:
            raise GraphError(f"{at} not an endpoint of {u}-{v}")

    # -- queries -----------------------------------------------------------

    @property
    def nodes(self):
        return list(self._nodes)

    def has_node(self, n):
        return n in self._node_set

    def edges(self):
        """Edges as (u, v, mark_u, mark_v) with u < v."""
        return [(k[0], k[1], m[0], m[1]) for k, m in sorted(self._edges.items())]

    def edge_count(self):
        return len(self._edges)

    def adjacent(self, u, v):
        return _key(u, v) in self._edges

    def neighbors(self, n):
        return set(self._adj.get(n, ()))

    def mark_at(self, u, v, at):
        """Mark at node ``at`` on edge u-v."""
        k = _key(u, v)
        try:
            a, b = self._edges[k]
        except KeyError:
            raise GraphError(f"no edge {u}-{v}") from None
        if at == k[0]:
            return a
        if at == k[1]:
            return b
        raise GraphError(f"{at} not an endpoint of {u}-{v}")

    def is_directed_edge(self, u, v):
        """True iff u -> v (tail at u, arrow at v)."""
        return (
            self.adjacent(u, v)
            and self.mark_at(u, v, u) == TAIL
            and self.mark_at(u, v, v) == ARROW
        )

    def is_bidirected_edge(self, u, v):
        return (
            self.adjacent(u, v)
            and self.mark_at(u, v, u) == ARROW
            and self.mark_at(u, v, v) == ARROW
        )

    def parents(self, n):
        return {u for u in self.neighbors(n) if self.is_directed_edge(u, n)}

    def children(self, n):
        return {v for v in self.neighbors(n) if self.is_directed_edge(n, v)}

    def has_circle_marks(self):
        return any(CIRCLE in m for m in self._edges.values())

    def copy(self):
        g = MixedGraph(self._nodes)
        g._edges = dict(self._edges)
        g._adj = {n: set(a) for n, a in self._adj.items()}
        return g

    def __eq__(self, other):
        return (
            isinstance(other, MixedGraph)
            and set(self._nodes) == set(other._nodes)
            and self._edges == other._edges
        )

    def __repr__(self):
        glyph = {TAIL: "-", ARROW: ">", CIRCLE: "o"}
        parts = [f"{u} {glyph[mu]}-{glyph[mv]} {v}" for u, v, mu, mv in self.edges()]
        return f"MixedGraph({len(self._nodes)} nodes: {'; '.join(parts)})"


# -- structural predicates --------------------------------------------------


def is_collider(g, triple):
    """Whether the middle node of an adjacent triple receives two arrowheads."""
    a, b, c = triple
    if not (g.adjacent(a, b) and g.adjacent(b, c)):
        raise GraphError(f"triple {triple} is not a path of length two")
    return g.mark_at(a, b, b) == ARROW and g.mark_at(b, c, b) == ARROW


def ancestors(g, x):
    """Nodes with a directed path (tail→arrow edges) to ``x``."""
    result = set()
    frontier = [x]
    while frontier:
        cur = frontier.pop()
        for p in g.parents(cur):
            if p not in result:
                result.add(p)
                frontier.append(p)
    return result


def descendants(g, x):
    result = set()
    frontier = [x]
    while frontier:
        cur = frontier.pop()
        for c in g.children(cur):
            if c not in result:
                result.add(c)
                frontier.append(c)
    return result


def _anteriors_of_set(g, zs):
    """z plus every ancestor of any z (reflexive ancestor closure)."""
    result = set(zs)
    for z in zs:
        result |= ancestors(g, z)
    return result


def m_separated(g, x, y, z):
    """Whether every path between x and y is blocked by z in a MAG.

    A path is blocked when some intermediate node is a non-collider in z, or
    a collider outside the (reflexive) ancestor closure of z.  Walk-state
    reachability gives the path-based criterion in polynomial time.
    """
    if g.has_circle_marks():
        raise GraphError("m-separation is defined on MAGs (no circle marks)")
    return not _m_connected(g, x, y, set(z), possible=False)


def m_separated_possibly(g, x, y, z):
    """Conservative m-separation on a PAG: separation must survive circles.

    Circle marks are read as wildcards that keep paths open: a node counts as
    a collider whenever both its marks could be arrowheads, and as a
    non-collider whenever either could be a tail; possibly-directed paths
    define the ancestor closure.
    """
    return not _m_connected(g, x, y, set(z), possible=True)


def _check_sep_args(g, x, y, z):
    if x == y:
        raise GraphError("x and y must differ")
    if x in z or y in z:
        raise GraphError("x and y must not be in z")
    for n in (x, y):
        if not g.has_node(n):
            raise GraphError(f"unknown node: {n}")


def _m_connected(g, x, y, z, possible):
    _check_sep_args(g, x, y, z)
    if not possible:
        # walk reachability over (node, incoming mark) states; equivalent to
        # path blocking on a MAG
        open_collider_at = _anteriors_of_set(g, z)
        seen = set()
        frontier = []
        for w in g.neighbors(x):
            if w == y:
                return True
            frontier.append((w, g.mark_at(x, w, w)))
        while frontier:
            v, in_mark = frontier.pop()
            if (v, in_mark) in seen:
                continue
            seen.add((v, in_mark))
            for w in g.neighbors(v):
                out_mark = g.mark_at(v, w, v)
                collider = in_mark == ARROW and out_mark == ARROW
                if not ((v in open_collider_at) if collider else (v not in z)):
                    continue
                if w == y:
                    return True
                frontier.append((w, g.mark_at(v, w, w)))
        return False

    # with circle wildcards a node may not take two conflicting readings on
    # one route, so connectivity must be over simple paths
    open_collider_at = z | _possible_anteriors(g, z)

    def dfs(v, in_mark, on_path):
        for w in g.neighbors(v):
            if w in on_path:
                continue
            out_mark = g.mark_at(v, w, v)
            could_collide = in_mark != TAIL and out_mark != TAIL
            could_pass = in_mark != ARROW or out_mark != ARROW
            ok = (could_collide and v in open_collider_at) or (could_pass and v not in z)
            if not ok:
                continue
            if w == y:
                return True
            if dfs(w, g.mark_at(v, w, w), on_path | {w}):
                return True
        return False

    for w in g.neighbors(x):
        if w == y:
            return True
        if dfs(w, g.mark_at(x, w, w), {x, w}):
            return True
    return False


def _possible_anteriors(g, zs):
    """Nodes with a potentially directed path into some member of zs."""
    result = set(zs)
    frontier = list(zs)
    while frontier:
        cur = frontier.pop()
        for u in g.neighbors(cur):
            # edge u *-* cur possibly directed u -> cur
            if g.mark_at(u, cur, u) != ARROW and g.mark_at(u, cur, cur) != TAIL:
                if u not in result:
                    result.add(u)
                    frontier.append(u)
    return result


# -- Possible-D-SEP ----------------------------------------------------------


def possible_d_sep(g, x, y):
    """Nodes reachable from x along paths whose interior triples are each a
    collider or an unmarked-non-collider inside a triangle."""
    result = set()
    seen = set()
    frontier = [(x, w) for w in g.neighbors(x)]
    while frontier:
        s, w = frontier.pop()
        if (s, w) in seen:
            continue
        seen.add((s, w))
        if w not in (x, y):
            result.add(w)
        for t in g.neighbors(w):
            if t == s:
                continue
            collider = g.mark_at(s, w, w) == ARROW and g.mark_at(w, t, w) == ARROW
            non_collider_marked = g.mark_at(s, w, w) == TAIL or g.mark_at(w, t, w) == TAIL
            triangle = g.adjacent(s, t)
            if collider or (triangle and not non_collider_marked):
                frontier.append((w, t))
    return result


def ext_d_sep(g, x, y):
    return possible_d_sep(g, x, y) | possible_d_sep(g, y, x)


# -- path searches -----------------------------------------------------------


def _path_cap(g, cap):
    if cap is not None:
        return cap
    return None if len(g.nodes) <= UNBOUNDED_NODE_LIMIT else DEFAULT_PATH_CAP


def find_discriminating_paths(g, triple, cap=None):
    """All discriminating paths (start, ..., a, b, c) for the triple (a, b, c).

    Interior nodes between the start and b are colliders on the path and
    parents of c; the start is not adjacent to c.
    """
    a, b, c = triple
    cap = _path_cap(g, cap)
    if not (g.adjacent(a, b) and g.adjacent(b, c)):
        return []
    results = []

    # grow backwards from (a, b, c); every appended node must be a collider on
    # the path and a parent of c, until a non-adjacent-to-c start is found
    def grow(path):
        if cap is not None and len(path) > cap + 1:
            return
        first = path[0]
        for prev in g.neighbors(first):
            if prev in path or prev == c:
                continue
            # first must be a collider between prev and path[1]
            if not (g.mark_at(prev, first, first) == ARROW and g.mark_at(first, path[1], first) == ARROW):
                continue
            if not g.is_directed_edge(first, c):
                continue
            candidate = [prev] + path
            if not g.adjacent(prev, c):
                if len(candidate) >= 4:
                    results.append(tuple(candidate))
            else:
                grow(candidate)

    grow([a, b, c])
    return results


def _uncovered_paths(g, start, end, edge_ok, cap):
    """DFS for uncovered paths: every consecutive triple unshielded."""
    cap = _path_cap(g, cap)
    results = []

    def extend(path):
        last = path[-1]
        if cap is not None and len(path) > cap + 1:
            return
        for nxt in sorted(g.neighbors(last), key=str):
            if nxt in path:
                continue
            if not edge_ok(last, nxt):
                continue
            if len(path) >= 2 and g.adjacent(path[-2], nxt):
                continue
            if nxt == end:
                results.append(tuple(path) + (end,))
                continue
            extend(path + [nxt])

    extend([start])
    return results


def find_uncovered_pd_paths(g, start, end, cap=None):
    """Uncovered potentially-directed paths from start to end."""

    def pd_edge(u, v):
        return g.mark_at(u, v, u) != ARROW and g.mark_at(u, v, v) != TAIL

    return _uncovered_paths(g, start, end, pd_edge, cap)


def find_uncovered_circle_paths(g, start, end, cap=None):
    """Uncovered paths from start to end made solely of circle-circle edges."""

    def circle_edge(u, v):
        return g.mark_at(u, v, u) == CIRCLE and g.mark_at(u, v, v) == CIRCLE

    return _uncovered_paths(g, start, end, circle_edge, cap)


# -- MAG validation -----------------------------------------------------------


def _has_directed_or_almost_directed_cycle(g):
    # directed cycle: some node is its own ancestor
    for n in g.nodes:
        if n in ancestors(g, n):
            return True
    # almost directed cycle: u <-> v with one an ancestor of the other
    for u, v, mu, mv in g.edges():
        if mu == ARROW and mv == ARROW:
            if u in ancestors(g, v) or v in ancestors(g, u):
                return True
    return False


def validate_mag(g, maximality_limit=12):
    """Check MAG-ness: arrow/tail marks only, no (almost) directed cycles and,
    on small graphs, maximality (every non-adjacent pair m-separable)."""
    if g.has_circle_marks():
        return False
    if _has_directed_or_almost_directed_cycle(g):
        return False
    nodes = g.nodes
    if len(nodes) <= maximality_limit:
        others = set(nodes)
        for a, b in combinations(nodes, 2):
            if g.adjacent(a, b):
                continue
            rest = sorted(others - {a, b}, key=str)
            found = False
            for r in range(len(rest) + 1):
                for zs in combinations(rest, r):
                    if m_separated(g, a, b, set(zs)):
                        found = True
                        break
                if found:
                    break
            if not found:
                return False
    return True


def skeleton_of(g):
    """Same adjacencies, every edge circle-circle."""
    return MixedGraph(g.nodes, [(u, v, CIRCLE, CIRCLE) for u, v, _, _ in g.edges()])


# -- serialization ------------------------------------------------------------


def graph_to_json(g):
    return {
        "nodes": sorted(g.nodes, key=str),
        "edges": [
            {"u": u, "v": v, "mark_u": mu, "mark_v": mv}
            for u, v, mu, mv in sorted(g.edges())
        ],
    }


def graph_to_json_str(g):
    return json.dumps(graph_to_json(g), sort_keys=False)


def graph_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    g = MixedGraph(obj.get("nodes", []))
    for e in obj.get("edges", []):
        mu, mv = e["mark_u"], e["mark_v"]
        if mu not in MARKS or mv not in MARKS:
            raise GraphError(f"bad mark in edge {e}")
        g.add_edge(e["u"], e["v"], mu, mv)
    return g
