"""Estimator facade so the pipeline composes with the scikit-learn ecosystem.

``GraphLearner`` is the offline phase (fit once, reuse); ``WhyExplainer``
adds the online query surface on top of a fitted graph.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from . import discovery
from .explain import explain as run_explain
from .explain import make_query
from .semantics import translate as translate_graph
from .validation import check_dataset, check_dimension, check_fitted, check_measure


class GraphLearner(BaseEstimator):
    """Learns an FD-augmented partial ancestral graph from tabular data.

    Parameters mirror the discovery configuration; fitted state lives in
    ``graph_``, ``fd_graph_`` and ``sepsets_``.
    """

    def __init__(self, alpha=0.05, max_cond_size=3, bins=5, path_cap=None, ci_method="gsq"):
        self.alpha = alpha
        self.max_cond_size = max_cond_size
        self.bins = bins
        self.path_cap = path_cap
        self.ci_method = ci_method

    def _config(self):
        return discovery.LearnerConfig(
            alpha=self.alpha,
            max_cond_size=self.max_cond_size,
            bins=self.bins,
            path_cap=self.path_cap,
            ci_method=self.ci_method,
        )

    def fit(self, X, y=None, fd_graph=None):
        d = check_dataset(X)
        gd = discovery.graph_dataset(d, bins=self.bins)
        from .tabular import discover_fds

        self.dataset_ = d
        self.fd_graph_ = fd_graph if fd_graph is not None else discover_fds(gd)
        self.result_ = discovery.learn(d, fd=self.fd_graph_, cfg=self._config())
        self.graph_ = self.result_.graph
        self.sepsets_ = self.result_.sepsets
        return self

    def predict(self, X=None):
        """The learned graph; provided for pipeline compatibility."""
        check_fitted(self, "graph_")
        return self.graph_


class WhyExplainer(BaseEstimator):
    """Fit once on a table, then answer why-queries about aggregate gaps."""

    def __init__(self, alpha=0.05, max_cond_size=3, bins=5, path_cap=None, ci_method="gsq"):
        self.alpha = alpha
        self.max_cond_size = max_cond_size
        self.bins = bins
        self.path_cap = path_cap
        self.ci_method = ci_method

    def fit(self, X, y=None, fd_graph=None):
        learner = GraphLearner(
            alpha=self.alpha,
            max_cond_size=self.max_cond_size,
            bins=self.bins,
            path_cap=self.path_cap,
            ci_method=self.ci_method,
        ).fit(X, fd_graph=fd_graph)
        self.dataset_ = learner.dataset_
        self.fd_graph_ = learner.fd_graph_
        self.result_ = learner.result_
        self.graph_ = learner.graph_
        return self

    def make_query(self, measure, agg, foreground, value_1, value_2, background=(), epsilon=None, epsilon_frac=0.1, sigma=None):
        check_fitted(self, "graph_")
        check_measure(self.dataset_, measure)
        check_dimension(self.dataset_, foreground)
        return make_query(
            self.dataset_,
            measure=measure,
            agg=agg,
            foreground=foreground,
            value_1=value_1,
            value_2=value_2,
            background=background,
            epsilon=epsilon,
            epsilon_frac=epsilon_frac,
            sigma=sigma,
        )

    def translate(self, query):
        check_fitted(self, "graph_")
        return translate_graph(
            self.result_, query.measure, query.foreground, query.background_dimensions()
        )

    def explain(self, query=None, top=None, **query_kwargs):
        check_fitted(self, "graph_")
        if query is None:
            query = self.make_query(**query_kwargs)
        out = run_explain(self.dataset_, self.result_, query, bins=self.bins)
        return out[:top] if top is not None else out
