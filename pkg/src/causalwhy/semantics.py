"""Translate graph structure into explanation semantics for a why-query.

Given a target measure, a foreground dimension and background dimensions,
every other variable is classified as having no explainability (separated
from the target once the context is held fixed), offering a causal
explanation (it is a parent/ancestor or almost-parent/almost-ancestor of the
target), or offering a non-causal explanation (statistically relevant only).
"""

from __future__ import annotations

from dataclasses import dataclass

from .mixedgraph import ARROW, CIRCLE, TAIL, GraphError, m_separated_possibly

NO_EXPLAINABILITY = "no_explainability"
CAUSAL = "causal"
NON_CAUSAL = "non_causal"


@dataclass(frozen=True)
class XdaSemantics:
    semantics: str
    rule: str

    def to_json(self):
        return {"semantics": self.semantics, "rule": self.rule}


def _graph_of(g):
    return g.graph if hasattr(g, "graph") else g


def _causal_reachable(graph, target):
    """Nodes with a chain of -> or o-> edges oriented toward ``target``.

    Returns two sets: reachable via directed edges only, and reachable when
    circle-tailed arrows may participate.  Bidirected and circle-circle edges
    never qualify.
    """
    strict = set()
    frontier = [target]
    while frontier:
        cur = frontier.pop()
        for u in graph.neighbors(cur):
            if graph.mark_at(u, cur, u) == TAIL and graph.mark_at(u, cur, cur) == ARROW:
                if u not in strict:
                    strict.add(u)
                    frontier.append(u)
    loose = set()
    frontier = [target]
    while frontier:
        cur = frontier.pop()
        for u in graph.neighbors(cur):
            if graph.mark_at(u, cur, u) in (TAIL, CIRCLE) and graph.mark_at(u, cur, cur) == ARROW:
                if u not in loose:
                    loose.add(u)
                    frontier.append(u)
    return strict, loose


def classify_variable(g, x, measure, foreground, background=()):
    """Classify one variable against the query context.

    Separation from the measure given foreground and backgrounds wins over
    everything else; then parenthood, ancestry, almost-parenthood and
    almost-ancestry are checked in that order.
    """
    graph = _graph_of(g)
    for node in (x, measure, foreground):
        if not graph.has_node(node):
            raise GraphError(f"unknown node: {node}")
    context = {foreground} | set(background)
    if x in context or x == measure:
        raise GraphError(f"{x} is part of the query context")

    if m_separated_possibly(graph, x, measure, context):
        return XdaSemantics(NO_EXPLAINABILITY, "R1")

    if graph.adjacent(x, measure):
        mark_x = graph.mark_at(x, measure, x)
        mark_m = graph.mark_at(x, measure, measure)
        if mark_x == TAIL and mark_m == ARROW:
            return XdaSemantics(CAUSAL, "R2")
    strict, loose = _causal_reachable(graph, measure)
    if x in strict:
        return XdaSemantics(CAUSAL, "R3")
    if graph.adjacent(x, measure):
        mark_x = graph.mark_at(x, measure, x)
        mark_m = graph.mark_at(x, measure, measure)
        if mark_x == CIRCLE and mark_m == ARROW:
            return XdaSemantics(CAUSAL, "R4")
    if x in loose:
        return XdaSemantics(CAUSAL, "R5")
    return XdaSemantics(NON_CAUSAL, "R6")


def translate(g, measure, foreground, background=()):
    """Classify every variable outside the query context; order-invariant."""
    graph = _graph_of(g)
    skip = {measure, foreground} | set(background)
    out = {}
    for x in sorted(graph.nodes, key=str):
        if x in skip:
            continue
        out[x] = classify_variable(g, x, measure, foreground, background)
    return out


def translation_to_json(result):
    return {x: sem.to_json() for x, sem in sorted(result.items(), key=lambda kv: str(kv[0]))}
