"""Ground-truthed synthetic data.

Two families: random causal graphs with functional-dependency columns and
latent masking (for evaluating graph recovery), and why-query instances
with a planted predicate explanation (for evaluating explanation search).
Plus the precision/recall/F1 metric used to compare learned graphs against
the truth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tabular
from .discovery import LearnerConfig, fci_orient, fci_skeleton
from .mixedgraph import ARROW, TAIL, MixedGraph, ancestors, graph_to_json, m_separated
from .tabular import FDGraph

DEFAULT_EXPECTED_DEGREE = 2.0
MASK_FRACTION = 0.05

# why-query generator constants: total probability mass on planted values and
# how strongly those rows skew toward the first foreground value
TRUTH_MASS = 0.24
TRUTH_FOREGROUND_RATE = 0.9


# -- random DAGs and forward sampling -----------------------------------------


@dataclass
class Dag:
    nodes: list
    parents: dict
    cards: dict
    cpts: dict = field(default_factory=dict)

    def children(self, n):
        return [c for c in self.nodes if n in self.parents[c]]

    def leaves(self):
        return [n for n in self.nodes if not self.children(n)]

    def to_mixed(self):
        g = MixedGraph(self.nodes)
        for c in self.nodes:
            for p in self.parents[c]:
                g.add_edge(p, c, TAIL, ARROW)
        return g


def random_dag(n_vars, rng, expected_degree=DEFAULT_EXPECTED_DEGREE, card_range=(3, 5)):
    """Erdos-Renyi DAG over a random topological order."""
    names = [f"V{i:02d}" for i in range(n_vars)]
    order = list(rng.permutation(n_vars))
    p = min(1.0, expected_degree / max(n_vars - 1, 1))
    parents = {n: [] for n in names}
    for a in range(n_vars):
        for b in range(a + 1, n_vars):
            if rng.random() < p:
                parents[names[order[b]]].append(names[order[a]])
    cards = {n: int(rng.integers(card_range[0], card_range[1] + 1)) for n in names}
    return Dag(nodes=names, parents=parents, cards=cards)


def sample_cpts(dag, rng, concentration=1.0):
    for n in dag.nodes:
        shape = int(np.prod([dag.cards[p] for p in dag.parents[n]], initial=1))
        dag.cpts[n] = rng.dirichlet([concentration] * dag.cards[n], size=shape)
    return dag


def forward_sample(dag, n_rows, rng):
    """Ancestral sampling; returns integer codes per node."""
    done = {}
    remaining = list(dag.nodes)
    while remaining:
        progressed = False
        for n in list(remaining):
            if all(p in done for p in dag.parents[n]):
                stratum = np.zeros(n_rows, dtype=np.int64)
                for p in dag.parents[n]:
                    stratum = stratum * dag.cards[p] + done[p]
                cdf = np.cumsum(dag.cpts[n], axis=1)
                u = rng.random(n_rows)
                done[n] = (u[:, None] > cdf[stratum]).sum(axis=1).astype(np.int64)
                remaining.remove(n)
                progressed = True
        if not progressed:
            raise ValueError("cyclic parent structure")
    return done


# -- marginal MAG and oracle PAG ------------------------------------------------


def dag_to_mag(dag, observed):
    """Marginal MAG of a DAG over the observed variables.

    Two observed nodes stay adjacent iff their observed ancestor set fails to
    d-separate them; endpoint marks follow ancestry in the full DAG.
    """
    full = dag.to_mixed()
    observed = [n for n in dag.nodes if n in set(observed)]
    anc = {n: ancestors(full, n) for n in dag.nodes}
    mag = MixedGraph(observed)
    for i, a in enumerate(observed):
        for b in observed[i + 1 :]:
            z = sorted(((anc[a] | anc[b]) & set(observed)) - {a, b})
            if m_separated(full, a, b, set(z)):
                continue
            mark_a = TAIL if a in anc[b] else ARROW
            mark_b = TAIL if b in anc[a] else ARROW
            mag.add_edge(a, b, mark_a, mark_b)
    return mag


class OracleSeparationTester:
    """CI oracle answering with graph separation instead of data."""

    def __init__(self, graph):
        self.graph = graph

    def independent(self, x, y, s):
        return m_separated(self.graph, x, y, set(s))


def oracle_pag(dag, observed):
    """Ground-truth PAG: skeleton and sepsets from a separation oracle on the
    generating DAG, then the full orientation rule set."""
    full = dag.to_mixed()
    observed = sorted(set(observed))
    cfg = LearnerConfig(max_cond_size=max(len(observed) - 2, 0))
    tester = OracleSeparationTester(full)
    skeleton, sepsets = fci_skeleton(None, observed, cfg, tester=tester)
    return fci_orient(skeleton, sepsets, cfg)


# -- graph-recovery benchmark ----------------------------------------------------


@dataclass
class SynAInstance:
    dataset: tabular.Dataset
    truth: MixedGraph
    truth_mag: MixedGraph
    fd_truth: FDGraph
    masked: list
    fd_columns: list
    seed: int
    params: dict

    def to_dir(self, path):
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self.dataset.to_dataframe().to_csv(path / "data.csv", index=False)
        (path / "truth_graph.json").write_text(json.dumps(graph_to_json(self.truth), indent=2))
        (path / "params.json").write_text(json.dumps(self.params, indent=2))


def _surjective_map(parent_card, child_card, rng):
    mapping = np.zeros(parent_card, dtype=np.int64)
    mapping[:child_card] = np.arange(child_card)
    if parent_card > child_card:
        mapping[child_card:] = rng.integers(0, child_card, size=parent_card - child_card)
    rng.shuffle(mapping)
    return mapping


def gen_syn_a(n_vars, seed, n_rows=2000, expected_degree=DEFAULT_EXPECTED_DEGREE, fd_per_leaf=2, mask_fraction=MASK_FRACTION):
    """Random causal graph benchmark instance.

    Forward-sampled data from a random DAG; a handful of variables are
    masked to induce latent confounding; each observed leaf grows a chain of
    deterministic FD columns.  The truth graph is the oracle PAG over the
    observed non-FD variables plus the directed FD edges.
    """
    if n_vars < 4:
        raise ValueError("n_vars must be >= 4")
    rng = np.random.default_rng(seed)
    dag = random_dag(n_vars, rng, expected_degree)
    sample_cpts(dag, rng)
    codes = forward_sample(dag, n_rows, rng)

    n_mask = max(1, round(mask_fraction * n_vars))
    leaves = set(dag.leaves())
    internal = [n for n in dag.nodes if n not in leaves]
    pool = internal if len(internal) >= n_mask else list(dag.nodes)
    masked = sorted(rng.choice(sorted(pool), size=n_mask, replace=False).tolist())
    observed = [n for n in dag.nodes if n not in masked]

    fd_columns = []
    fd_edges = []
    fd_codes = {}
    fd_cards = {}
    for leaf in sorted(leaves):
        if leaf in masked:
            continue
        parent, parent_card, parent_codes = leaf, dag.cards[leaf], codes[leaf]
        for j in range(fd_per_leaf):
            if parent_card <= 2:
                # chain cannot shrink without going one-to-one; branch from the leaf
                parent, parent_card, parent_codes = leaf, dag.cards[leaf], codes[leaf]
            child = f"{leaf}F{j}"
            child_card = int(rng.integers(2, parent_card))  # strictly below parent
            mapping = _surjective_map(parent_card, child_card, rng)
            fd_codes[child] = mapping[parent_codes]
            fd_cards[child] = child_card
            fd_columns.append(child)
            fd_edges.append((parent, child))
            parent, parent_card, parent_codes = child, child_card, fd_codes[child]

    cols = []
    for n in observed:
        cols.append(tabular.Column(n, tabular.DIMENSION, [f"{n}_{c}" for c in codes[n]]))
    for n in fd_columns:
        cols.append(tabular.Column(n, tabular.DIMENSION, [f"{n}_{c}" for c in fd_codes[n]]))
    dataset = tabular.Dataset(cols)

    truth_mag = dag_to_mag(dag, observed)
    truth = oracle_pag(dag, observed)
    for n in fd_columns:
        truth.add_node(n)
    for u, v in fd_edges:
        truth.add_edge(u, v, TAIL, ARROW)

    closure = set(fd_edges)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(closure):
            for (c, d_) in list(closure):
                if b == c and (a, d_) not in closure:
                    closure.add((a, d_))
                    changed = True
    fd_nodes = sorted({n for e in closure for n in e})
    reduced = tabular.transitive_reduction(fd_nodes, closure)
    fd_truth = FDGraph(nodes=fd_nodes, edges=closure, depth=tabular._depths(fd_nodes, reduced))

    params = {
        "n_vars": n_vars,
        "n_rows": n_rows,
        "expected_degree": expected_degree,
        "fd_per_leaf": fd_per_leaf,
        "mask_fraction": mask_fraction,
        "seed": seed,
        "masked": masked,
    }
    return SynAInstance(
        dataset=dataset,
        truth=truth,
        truth_mag=truth_mag,
        fd_truth=fd_truth,
        masked=masked,
        fd_columns=fd_columns,
        seed=seed,
        params=params,
    )


# -- why-query benchmark ----------------------------------------------------------


@dataclass
class SynBInstance:
    dataset: tabular.Dataset
    truth_values: list
    params: dict
    seed: int

    def query(self, agg="SUM", epsilon_frac=0.1, sigma=None):
        from .explain import make_query

        return make_query(
            self.dataset,
            measure="Z",
            agg=agg,
            foreground="X",
            value_1="x1",
            value_2="x2",
            epsilon_frac=epsilon_frac,
            sigma=sigma,
        )

    def truth_graph(self):
        g = MixedGraph(["X", "Y", "Z"])
        g.add_edge("X", "Y", TAIL, ARROW)
        g.add_edge("Y", "Z", TAIL, ARROW)
        return g

    def to_dir(self, path):
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self.dataset.to_dataframe().to_csv(path / "data.csv", index=False)
        (path / "truth_graph.json").write_text(json.dumps(graph_to_json(self.truth_graph()), indent=2))
        (path / "truth_explanation.json").write_text(
            json.dumps({"dimension": "Y", "values": sorted(self.truth_values)}, indent=2)
        )
        (path / "params.json").write_text(json.dumps(self.params, indent=2))


def gen_syn_b(
    rows=10000,
    cardinality=10,
    k=3,
    mu=10.0,
    mu_star=60.0,
    std=math.sqrt(10.0),
    seed=0,
    truth_mass=TRUTH_MASS,
    foreground_rate=TRUTH_FOREGROUND_RATE,
):
    """Planted-explanation instance: binary X, categorical Y, numeric Z.

    X skews toward its first value exactly on rows carrying the k planted Y
    values (so each planted filter shifts the gap equally and the remaining
    filters carry none of it), and Z is Gaussian with an elevated mean on
    those rows.
    """
    if k >= cardinality:
        raise ValueError("k must be below the cardinality")
    rng = np.random.default_rng(seed)
    values = [f"y{i:03d}" for i in range(cardinality)]
    truth_idx = np.sort(rng.choice(cardinality, size=k, replace=False))
    truth = [values[i] for i in truth_idx]

    mass = np.empty(cardinality)
    mass[truth_idx] = truth_mass / k
    others = np.setdiff1d(np.arange(cardinality), truth_idx)
    mass[others] = (1.0 - truth_mass) * rng.dirichlet(np.ones(len(others)))

    y_codes = rng.choice(cardinality, size=rows, p=mass)
    is_truth = np.isin(y_codes, truth_idx)
    p_x1 = np.where(is_truth, foreground_rate, 0.5)
    x_codes = (rng.random(rows) >= p_x1).astype(np.int64)  # 0 -> x1
    z = rng.normal(np.where(is_truth, mu_star, mu), std)

    dataset = tabular.Dataset(
        [
            tabular.Column("X", tabular.DIMENSION, None, codes=x_codes, categories=["x1", "x2"]),
            tabular.Column("Y", tabular.DIMENSION, None, codes=y_codes, categories=values),
            tabular.Column("Z", tabular.MEASURE, z),
        ]
    )
    params = {
        "rows": rows,
        "cardinality": cardinality,
        "k": k,
        "mu": mu,
        "mu_star": mu_star,
        "std": std,
        "seed": seed,
        "truth_mass": truth_mass,
        "foreground_rate": foreground_rate,
    }
    return SynBInstance(dataset=dataset, truth_values=truth, params=params, seed=seed)


# -- graph comparison ---------------------------------------------------------------


def _assertions(g):
    adjacency = set()
    arrowheads = set()
    for u, v, mu, mv in g.edges():
        adjacency.add(("adj", u, v))
        if mu == ARROW:
            arrowheads.add(("arrow", v, u))
        if mv == ARROW:
            arrowheads.add(("arrow", u, v))
    return adjacency | arrowheads


def compare_graphs(estimated, truth):
    """Precision/recall/F1 over adjacency plus arrowhead-endpoint assertions."""
    est = _assertions(estimated)
    tru = _assertions(truth)
    correct = len(est & tru)
    precision = correct / len(est) if est else (1.0 if not tru else 0.0)
    recall = correct / len(tru) if tru else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def filter_f1(predicted_values, truth_values):
    """F1 of a predicted filter set against the planted one."""
    pred = set(predicted_values)
    tru = set(truth_values)
    if not pred and not tru:
        return 1.0
    correct = len(pred & tru)
    p = correct / len(pred) if pred else 0.0
    r = correct / len(tru) if tru else 0.0
    return 2 * p * r / (p + r) if p + r > 0 else 0.0
