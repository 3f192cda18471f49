"""Scikit-learn style estimators wrapping the k-median solvers.

These make the heuristics compose with the wider ecosystem: they follow the
fit/predict/transform protocol of clustering estimators, accept either raw
coordinates (``metric="euclidean"``) or a precomputed distance matrix
(``metric="precomputed"``), take demands through ``sample_weight``, and
support ``get_params``/``set_params``/``clone``.  The fitted medians are
training points, as in k-medoids.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.metrics import pairwise_distances
from sklearn.utils.validation import check_array, check_is_fitted

from .solvers import (TiePolicy, exact_kmedian, forward_greedy,
                      reverse_greedy_chain, truncate_chain)
from .space import WeightedMetricSpace
from .validation import check_square_distance_matrix


class _KMedianBase(TransformerMixin, ClusterMixin, BaseEstimator):
    def __init__(self, n_clusters=2, *, metric="euclidean", tie="lexicographic",
                 tie_priority=None, random_state=None):
        self.n_clusters = n_clusters
        self.metric = metric
        self.tie = tie
        self.tie_priority = tie_priority
        self.random_state = random_state

    def _tie_policy(self) -> TiePolicy:
        if self.tie == "lexicographic":
            return TiePolicy.lexicographic()
        if self.tie == "priority":
            if self.tie_priority is None:
                raise ValueError("tie='priority' requires tie_priority")
            return TiePolicy.from_priority(self.tie_priority)
        if self.tie == "random":
            seed = 0 if self.random_state is None else int(self.random_state)
            return TiePolicy.seeded_random(seed)
        raise ValueError(f"unknown tie policy {self.tie!r}")

    def _distances(self, X) -> np.ndarray:
        if self.metric == "precomputed":
            X = check_array(X)
            return check_square_distance_matrix(X, "X")
        X = check_array(X)
        d = pairwise_distances(X, metric=self.metric)
        # pairwise_distances is not exactly symmetric; the solvers assume it is
        d = np.minimum(d, d.T)
        np.fill_diagonal(d, 0.0)
        return d

    def _space(self, X, sample_weight) -> WeightedMetricSpace:
        d = self._distances(X)
        n = d.shape[0]
        if not 1 <= int(self.n_clusters) <= n:
            raise ValueError(f"n_clusters={self.n_clusters} outside [1, {n}]")
        if sample_weight is None:
            sample_weight = np.ones(n)
        return WeightedMetricSpace.from_matrix(d, weights=sample_weight,
                                               pseudometric=True)

    def fit(self, X, y=None, sample_weight=None):
        space = self._space(X, sample_weight)
        self._solve(space)
        asg = space.assignment(self.medians_)
        lookup = {m: pos for pos, m in enumerate(self.medians_)}
        self.labels_ = np.asarray([lookup[int(f)] for f in asg.nearest])
        self.n_features_in_ = np.asarray(X).shape[1]
        if self.metric != "precomputed":
            self._fit_X = check_array(X)
        return self

    def _median_distances(self, X) -> np.ndarray:
        check_is_fitted(self, "medians_")
        X = check_array(X)
        if self.metric == "precomputed":
            if X.shape[1] != self.n_features_in_:
                raise ValueError(
                    f"X has {X.shape[1]} columns; expected distances to the "
                    f"{self.n_features_in_} fit points")
            return X[:, self.medians_]
        return pairwise_distances(X, self._fit_X[self.medians_], metric=self.metric)

    def predict(self, X) -> np.ndarray:
        """Index of the nearest fitted median for each row of X."""
        return self._median_distances(X).argmin(axis=1)

    def transform(self, X) -> np.ndarray:
        """Distance from each row of X to each fitted median."""
        return self._median_distances(X)


class ReverseGreedyKMedian(_KMedianBase):
    """Close facilities one at a time, cheapest removal first.

    Attributes after fit: ``medians_`` (sorted training-point indices),
    ``cost_``, ``labels_``, and ``trace_`` (the full removal record).

    >>> import numpy as np
    >>> X = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0], [5.1, 5.0]])
    >>> ReverseGreedyKMedian(n_clusters=2).fit(X).labels_
    array([0, 0, 1, 1])
    """

    def __init__(self, n_clusters=2, *, metric="euclidean", tie="lexicographic",
                 tie_priority=None, random_state=None, algorithm="fast"):
        super().__init__(n_clusters, metric=metric, tie=tie,
                         tie_priority=tie_priority, random_state=random_state)
        self.algorithm = algorithm

    def _solve(self, space):
        chain = reverse_greedy_chain(space, self._tie_policy(), self.algorithm)
        trace = truncate_chain(chain, int(self.n_clusters))
        self.trace_ = trace
        self.medians_ = np.asarray(trace.final_set)
        self.cost_ = trace.final_cost


class ForwardGreedyKMedian(_KMedianBase):
    """Open facilities one at a time, best cost reduction first."""

    def _solve(self, space):
        trace = forward_greedy(space, int(self.n_clusters), self._tie_policy())
        self.trace_ = trace
        self.medians_ = np.asarray(trace.final_set)
        self.cost_ = trace.final_cost


class ExactKMedian(_KMedianBase):
    """Exhaustive optimal k-median for small instances."""

    def __init__(self, n_clusters=2, *, metric="euclidean", budget=10_000_000):
        super().__init__(n_clusters, metric=metric)
        self.budget = budget

    def _solve(self, space):
        members, cost = exact_kmedian(space, int(self.n_clusters), self.budget)
        self.trace_ = None
        self.medians_ = np.asarray(members)
        self.cost_ = cost
