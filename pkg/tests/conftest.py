"""Shared fixtures and independent oracles.

The oracles here re-derive graph properties from first principles (path
enumeration, BFS reachability) so the production implementations are checked
against something that shares no code with them.
"""

from __future__ import annotations

import numpy as np
import pytest

from causalwhy import tabular
from causalwhy.mixedgraph import ARROW


def all_simple_paths(g, x, y, cap=None):
    paths = []

    def dfs(path):
        last = path[-1]
        if cap is not None and len(path) > cap + 1:
            return
        for nxt in sorted(g.neighbors(last), key=str):
            if nxt in path:
                continue
            if nxt == y:
                paths.append(path + [nxt])
            else:
                dfs(path + [nxt])

    dfs([x])
    return paths


def reachability_oracle(g, x, reverse=False):
    """BFS over directed edges; reverse=True walks child->parent."""
    seen = set()
    frontier = [x]
    while frontier:
        cur = frontier.pop()
        for other in g.neighbors(cur):
            if reverse:
                ok = g.is_directed_edge(other, cur)
            else:
                ok = g.is_directed_edge(cur, other)
            if ok and other not in seen:
                seen.add(other)
                frontier.append(other)
    return seen


def msep_path_oracle(g, x, y, z):
    """m-separation by exhaustive path enumeration (the textbook definition)."""
    z = set(z)
    anc_closure = set(z)
    for node in z:
        anc_closure |= reachability_oracle(g, node, reverse=True)
    for path in all_simple_paths(g, x, y):
        open_path = True
        for i in range(1, len(path) - 1):
            prev, v, nxt = path[i - 1], path[i], path[i + 1]
            collider = g.mark_at(prev, v, v) == ARROW and g.mark_at(v, nxt, v) == ARROW
            if collider:
                if v not in anc_closure:
                    open_path = False
                    break
            else:
                if v in z:
                    open_path = False
                    break
        if open_path:
            return False
    return True


def random_mag(n_nodes, rng, p_edge=0.35):
    """Random MAG built from a random DAG with a random latent split."""
    from causalwhy.synth import dag_to_mag, random_dag

    total = n_nodes + rng.integers(0, 3)
    dag = random_dag(int(total), rng, expected_degree=p_edge * (total - 1))
    observed = sorted(rng.choice(dag.nodes, size=n_nodes, replace=False).tolist())
    return dag_to_mag(dag, observed)


def sample_chain(n=10000, seed=0, flip=0.15, card=3):
    """Forward-sampled X -> Y -> Z chain with strong links."""
    rng = np.random.default_rng(seed)
    x = rng.integers(0, card, n)
    y = (x + (rng.random(n) < flip).astype(int)) % card
    z = (y + (rng.random(n) < flip).astype(int)) % card
    return tabular.Dataset(
        [
            tabular.Column("X", tabular.DIMENSION, [f"x{v}" for v in x]),
            tabular.Column("Y", tabular.DIMENSION, [f"y{v}" for v in y]),
            tabular.Column("Z", tabular.DIMENSION, [f"z{v}" for v in z]),
        ]
    )


@pytest.fixture(scope="session")
def cityinfo():
    """50 cities in 10 states in 3 countries, skewed city sizes."""
    rng = np.random.default_rng(42)
    n = 5000
    weights = rng.dirichlet(np.ones(50) * 2)
    city = rng.choice(50, size=n, p=weights)
    state = city % 10
    country = state % 3
    return tabular.Dataset(
        [
            tabular.Column("City", tabular.DIMENSION, [f"c{v:02d}" for v in city]),
            tabular.Column("State", tabular.DIMENSION, [f"s{v}" for v in state]),
            tabular.Column("Country", tabular.DIMENSION, [f"n{v}" for v in country]),
        ]
    )
