"""causalwhy: causal and non-causal explanations for aggregate why-queries."""

from .tabular import (
    Dataset,
    Filter,
    Predicate,
    Subspace,
    aggregate,
    discover_fds,
    discretize,
    from_dataframe,
    load_csv,
    select,
)
from .mixedgraph import MixedGraph, m_separated
from .discovery import AugmentedPag, LearnerConfig, learn, learn_agnostic
from .semantics import classify_variable, translate
from .explain import (
    Explanation,
    WhyQuery,
    brute_force,
    eval_delta,
    explain,
    make_query,
    optimize_avg,
    optimize_sum,
    responsibility,
)
from .estimators import GraphLearner, WhyExplainer

__version__ = "0.1.0"

__all__ = [
    "AugmentedPag",
    "Dataset",
    "Explanation",
    "Filter",
    "GraphLearner",
    "LearnerConfig",
    "MixedGraph",
    "Predicate",
    "Subspace",
    "WhyExplainer",
    "WhyQuery",
    "aggregate",
    "brute_force",
    "classify_variable",
    "discover_fds",
    "discretize",
    "eval_delta",
    "explain",
    "from_dataframe",
    "learn",
    "learn_agnostic",
    "load_csv",
    "m_separated",
    "make_query",
    "optimize_avg",
    "optimize_sum",
    "responsibility",
    "select",
    "translate",
]
