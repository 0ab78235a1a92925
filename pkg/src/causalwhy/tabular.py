"""Columnar data model: selection, aggregation, discretization and
functional-dependency discovery over multi-dimensional tables.

A table is a set of named columns of equal length.  Categorical columns are
*dimensions*, numeric columns are *measures*.  Dimensions are stored as
integer codes against a per-column category list so that downstream
contingency-table work stays in numpy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

DIMENSION = "dimension"
MEASURE = "measure"

BIN_SUFFIX = "__bin"


class TabularError(ValueError):
    pass


class UnknownColumnError(TabularError):
    pass


class EmptyAggregateError(TabularError):
    """AVG requested over an empty selection."""


@dataclass(frozen=True)
class Filter:
    """Equality assertion on one dimension, e.g. Smoking=Yes."""

    dimension: str
    value: object

    def __repr__(self):
        return f"{self.dimension}={self.value}"


@dataclass(frozen=True)
class Predicate:
    """Disjunction of filters on a single dimension."""

    dimension: str
    values: frozenset

    def __init__(self, dimension, values):
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "values", frozenset(values))
        if not self.values:
            raise TabularError("predicate needs at least one value")

    def __len__(self):
        return len(self.values)

    def filters(self):
        return [Filter(self.dimension, v) for v in sorted(self.values, key=str)]

    def __repr__(self):
        vals = ",".join(str(v) for v in sorted(self.values, key=str))
        return f"{self.dimension}∈{{{vals}}}"


@dataclass(frozen=True)
class Subspace:
    """Conjunction of filters on pairwise-distinct dimensions."""

    filters: tuple

    def __init__(self, filters):
        filters = tuple(filters)
        dims = [f.dimension for f in filters]
        if len(dims) != len(set(dims)):
            raise TabularError("subspace filters must be on distinct dimensions")
        object.__setattr__(self, "filters", tuple(sorted(filters, key=lambda f: f.dimension)))

    def dimensions(self):
        return [f.dimension for f in self.filters]

    def __repr__(self):
        return " ∧ ".join(repr(f) for f in self.filters) if self.filters else "⊤"


class Column:
    """One named column; dimensions carry integer codes plus categories."""

    def __init__(self, name, kind, values, codes=None, categories=None):
        self.name = name
        self.kind = kind
        if kind == DIMENSION:
            if codes is None:
                categories, codes = np.unique(np.asarray(values, dtype=object), return_inverse=True)
                categories = list(categories)
            self.codes = np.asarray(codes, dtype=np.int64)
            self.categories = list(categories)
            self.values = None
        else:
            self.values = np.asarray(values, dtype=np.float64)
            self.codes = None
            self.categories = None

    @property
    def cardinality(self):
        if self.kind != DIMENSION:
            raise TabularError(f"{self.name} is not a dimension")
        return len(self.categories)

    def __len__(self):
        arr = self.codes if self.kind == DIMENSION else self.values
        return len(arr)


class Dataset:
    """Immutable columnar table with dimension/measure tagging.

    ``column_order`` preserves the order columns appeared in the source; all
    deterministic tie-breaking downstream relies on it.
    """

    def __init__(self, columns):
        if not columns:
            raise TabularError("dataset needs at least one column")
        names = [c.name for c in columns]
        if len(names) != len(set(names)):
            raise TabularError("duplicate column names")
        lengths = {len(c) for c in columns}
        if len(lengths) != 1:
            raise TabularError("columns differ in length")
        self._columns = {c.name: c for c in columns}
        self.column_order = names
        self.row_count = lengths.pop()

    # -- basic access -----------------------------------------------------

    def __contains__(self, name):
        return name in self._columns

    def column(self, name):
        try:
            return self._columns[name]
        except KeyError:
            raise UnknownColumnError(f"unknown column: {name}") from None

    @property
    def dimensions(self):
        return [n for n in self.column_order if self._columns[n].kind == DIMENSION]

    @property
    def measures(self):
        return [n for n in self.column_order if self._columns[n].kind == MEASURE]

    def domain(self, name):
        return list(self.column(name).categories)

    def codes(self, name):
        col = self.column(name)
        if col.kind != DIMENSION:
            raise TabularError(f"{name} is not a dimension")
        return col.codes

    def measure_values(self, name):
        col = self.column(name)
        if col.kind != MEASURE:
            raise TabularError(f"{name} is not a measure")
        return col.values

    def schema(self):
        return {
            "columns": [{"name": n, "kind": self._columns[n].kind} for n in self.column_order],
            "rows": self.row_count,
        }

    def schema_json(self):
        return json.dumps(self.schema(), sort_keys=False)

    # -- row subsetting ---------------------------------------------------

    def take(self, mask_or_index):
        cols = []
        for n in self.column_order:
            c = self._columns[n]
            if c.kind == DIMENSION:
                cols.append(Column(n, DIMENSION, None, codes=c.codes[mask_or_index], categories=c.categories))
            else:
                cols.append(Column(n, MEASURE, c.values[mask_or_index]))
        return Dataset(cols)

    def mask_for(self, target):
        """Boolean row mask for a Filter, Predicate or Subspace."""
        if isinstance(target, Filter):
            col = self.column(target.dimension)
            if col.kind != DIMENSION:
                raise TabularError(f"{target.dimension} is not a dimension")
            try:
                code = col.categories.index(target.value)
            except ValueError:
                return np.zeros(self.row_count, dtype=bool)
            return col.codes == code
        if isinstance(target, Predicate):
            col = self.column(target.dimension)
            if col.kind != DIMENSION:
                raise TabularError(f"{target.dimension} is not a dimension")
            codes = [col.categories.index(v) for v in target.values if v in col.categories]
            if not codes:
                return np.zeros(self.row_count, dtype=bool)
            return np.isin(col.codes, codes)
        if isinstance(target, Subspace):
            mask = np.ones(self.row_count, dtype=bool)
            for f in target.filters:
                mask &= self.mask_for(f)
            return mask
        raise TabularError(f"unsupported selection target: {type(target).__name__}")

    def to_dataframe(self):
        data = {}
        for n in self.column_order:
            c = self._columns[n]
            if c.kind == DIMENSION:
                data[n] = [c.categories[i] for i in c.codes]
            else:
                data[n] = c.values
        return pd.DataFrame(data)


def select(d, target, complement=False):
    """Rows of ``d`` satisfying ``target`` (or its complement)."""
    mask = d.mask_for(target)
    if complement:
        mask = ~mask
    return d.take(mask)


def aggregate(d, measure, agg):
    agg = agg.upper()
    if agg == "COUNT":
        return float(d.row_count)
    values = d.measure_values(measure)
    if agg == "SUM":
        return float(values.sum()) if len(values) else 0.0
    if agg == "AVG":
        if len(values) == 0:
            raise EmptyAggregateError("AVG over empty selection")
        return float(values.mean())
    raise TabularError(f"unsupported aggregate: {agg}")


# -- discretization -------------------------------------------------------


@dataclass(frozen=True)
class BinLabel:
    """Equal-frequency bin carrying its numeric range (closed interval)."""

    lo: float
    hi: float

    def __repr__(self):
        return f"[{self.lo:g}, {self.hi:g}]"

    def __lt__(self, other):
        return (self.lo, self.hi) < (other.lo, other.hi)


def bin_column_name(measure):
    return measure + BIN_SUFFIX


def discretize(d, measure, bins=5):
    """Append an equal-frequency bin dimension for ``measure``.

    Ties never straddle bins, so fewer distinct values than ``bins`` simply
    collapses the bin count.
    """
    if bins < 2:
        raise TabularError("bins must be >= 2")
    values = d.measure_values(measure)
    n = len(values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    raw_bin = (ranks * bins) // max(n, 1)

    # pull equal values into the bin of their first occurrence
    sorted_vals = values[order]
    sorted_bins = raw_bin[order]
    for i in range(1, n):
        if sorted_vals[i] == sorted_vals[i - 1]:
            sorted_bins[i] = sorted_bins[i - 1]
    raw_bin[order] = sorted_bins

    labels = []
    codes = np.zeros(n, dtype=np.int64)
    remap = {}
    for i in np.sort(np.unique(sorted_bins)):
        in_bin = raw_bin == i
        lo = float(values[in_bin].min())
        hi = float(values[in_bin].max())
        remap[i] = len(labels)
        labels.append(BinLabel(lo, hi))
    for old, new in remap.items():
        codes[raw_bin == old] = new

    cols = [d.column(nm) for nm in d.column_order]
    cols.append(Column(bin_column_name(measure), DIMENSION, None, codes=codes, categories=labels))
    return Dataset(cols)


# -- CSV loading ----------------------------------------------------------


def load_csv(path, schema_hints=None):
    """Load an RFC-4180 CSV with a header row into a Dataset.

    Columns whose values all parse as numbers become measures, the rest
    dimensions; ``schema_hints`` overrides per column.  Rows with any missing
    value are dropped.
    """
    schema_hints = schema_hints or {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise TabularError(f"{path}: empty file")
    if len(header) != len(set(header)):
        raise TabularError(f"{path}: duplicate header names")

    df = pd.read_csv(path, dtype=object, keep_default_na=True, na_values=[""], skipinitialspace=False)
    df = df.dropna(axis=0, how="any")
    if len(df) == 0:
        raise TabularError(f"{path}: no data rows after dropping missing values")

    cols = []
    for name in header:
        raw = df[name].to_numpy(dtype=object)
        hint = schema_hints.get(name)
        if hint == DIMENSION:
            cols.append(Column(name, DIMENSION, [str(v) for v in raw]))
            continue
        numeric = pd.to_numeric(pd.Series(raw), errors="coerce")
        if hint == MEASURE:
            if numeric.isna().any():
                raise TabularError(f"{path}: column {name} hinted as measure but not numeric")
            cols.append(Column(name, MEASURE, numeric.to_numpy(dtype=np.float64)))
        elif not numeric.isna().any():
            cols.append(Column(name, MEASURE, numeric.to_numpy(dtype=np.float64)))
        else:
            cols.append(Column(name, DIMENSION, [str(v) for v in raw]))
    return Dataset(cols)


def from_dataframe(df, schema_hints=None):
    """Build a Dataset from a pandas DataFrame (numeric dtypes → measures)."""
    schema_hints = schema_hints or {}
    if df.columns.duplicated().any():
        raise TabularError("duplicate column names")
    df = df.dropna(axis=0, how="any")
    if len(df) == 0:
        raise TabularError("no data rows after dropping missing values")
    cols = []
    for name in df.columns:
        hint = schema_hints.get(name)
        series = df[name]
        is_numeric = pd.api.types.is_numeric_dtype(series)
        if hint == MEASURE or (hint is None and is_numeric):
            cols.append(Column(str(name), MEASURE, series.to_numpy(dtype=np.float64)))
        else:
            cols.append(Column(str(name), DIMENSION, [str(v) for v in series]))
    return Dataset(cols)


# -- functional dependencies ----------------------------------------------


@dataclass
class FDGraph:
    """Directed graph of deterministic functional dependencies.

    ``edges`` keeps transitively implied pairs; ``depth`` is computed on the
    transitive reduction so FD chains resolve bottom-up one level at a time.
    ``redundant`` lists columns dropped because they mutually determine a
    retained column.
    """

    nodes: list = field(default_factory=list)
    edges: set = field(default_factory=set)
    depth: dict = field(default_factory=dict)
    redundant: list = field(default_factory=list)

    def parents(self, node):
        return [u for (u, v) in self.edges if v == node]

    def children(self, node):
        return [v for (u, v) in self.edges if u == node]

    def roots(self):
        non_roots = {v for (_, v) in self.edges}
        return [n for n in self.nodes if n not in non_roots]

    def is_empty(self):
        return not self.edges

    def to_json(self):
        return {
            "nodes": list(self.nodes),
            "edges": sorted([list(e) for e in self.edges]),
            "depth": dict(self.depth),
            "redundant": list(self.redundant),
        }


def _fd_holds(codes_x, codes_y, card_x, card_y):
    # X -> Y deterministically iff the (x, y) pair count equals the x count
    pair = codes_x.astype(np.int64) * card_y + codes_y
    return len(np.unique(pair)) == len(np.unique(codes_x))


def _assert_acyclic(nodes, edges):
    children = {n: [] for n in nodes}
    for u, v in edges:
        children[u].append(v)
    seen, stack = set(), set()

    def visit(n):
        if n in stack:
            raise TabularError("cyclic FD graph")
        if n in seen:
            return
        stack.add(n)
        for c in children[n]:
            visit(c)
        stack.remove(n)
        seen.add(n)

    for n in nodes:
        visit(n)


def transitive_reduction(nodes, edges):
    edge_set = set(edges)
    children = {n: {v for (u, v) in edge_set if u == n} for n in nodes}

    def reachable(start, skip_edge):
        seen = set()
        frontier = [start]
        while frontier:
            cur = frontier.pop()
            for nxt in children[cur]:
                if (cur, nxt) == skip_edge:
                    continue
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    reduced = set()
    for (u, v) in edge_set:
        if v not in reachable(u, (u, v)):
            reduced.add((u, v))
    return reduced


def _depths(nodes, reduced_edges):
    parents = {n: [u for (u, v) in reduced_edges if v == n] for n in nodes}
    depth = {}

    def d(n):
        if n in depth:
            return depth[n]
        ps = parents[n]
        depth[n] = 0 if not ps else 1 + max(d(p) for p in ps)
        return depth[n]

    for n in nodes:
        d(n)
    return depth


def discover_fds(d, columns=None):
    """Detect deterministic FDs between dimension-valued columns.

    Mutually determining columns are collapsed: the earliest column in
    dataset order is retained, the rest are flagged redundant and removed
    from the graph.
    """
    if columns is None:
        columns = d.dimensions
    if not columns:
        raise TabularError("FD discovery needs at least one dimension")
    codes = {c: d.codes(c) for c in columns}
    cards = {c: d.column(c).cardinality for c in columns}

    raw_edges = set()
    for x in columns:
        for y in columns:
            if x == y:
                continue
            if _fd_holds(codes[x], codes[y], cards[x], cards[y]):
                raw_edges.add((x, y))

    # collapse mutual-determination groups onto the earliest column
    order = {c: i for i, c in enumerate(columns)}
    redundant = set()
    rep = {c: c for c in columns}
    for x in columns:
        for y in columns:
            if order[x] < order[y] and (x, y) in raw_edges and (y, x) in raw_edges:
                if rep[y] == y:
                    rep[y] = rep[x]
                    redundant.add(y)
    kept = [c for c in columns if c not in redundant]
    edges = set()
    for (u, v) in raw_edges:
        u2, v2 = rep[u], rep[v]
        if u2 != v2 and u2 not in redundant and v2 not in redundant:
            edges.add((u2, v2))

    _assert_acyclic(kept, edges)
    nodes = [c for c in kept if any(c in e for e in edges)]
    reduced = transitive_reduction(nodes, edges)
    depth = _depths(nodes, reduced)
    return FDGraph(nodes=nodes, edges=edges, depth=depth, redundant=sorted(redundant, key=lambda c: order[c]))
