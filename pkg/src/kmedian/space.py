"""Weighted (pseudo)metric spaces with dense and implicit distance oracles.

A space is a set of points ``0..n-1``, each carrying a nonnegative demand
weight and an optional label, plus a distance oracle.  Two oracle kinds live
here: a dense symmetric matrix and anything implementing the same small
protocol (``n``, ``distance``, ``row``, ``matrix``, ``integral``); the
layered-tree oracle in :mod:`kmedian.generators` is the second implementation.

Facility sets are plain sorted tuples of point ids.  All operations are pure
reads; spaces are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceededError, DomainError, InputError
from .report import BoundReport
from .validation import check_square_distance_matrix, check_weights

# Largest point count for which a dense matrix may be materialized (n^2 floats).
DENSE_LIMIT = 8192


class DenseOracle:
    """Distance oracle backed by a full symmetric matrix."""

    def __init__(self, matrix: np.ndarray):
        self._m = np.ascontiguousarray(matrix, dtype=np.float64)
        self._m.setflags(write=False)
        self.n = self._m.shape[0]

    def distance(self, a: int, b: int) -> float:
        return float(self._m[a, b])

    def row(self, i: int) -> np.ndarray:
        return self._m[i]

    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def integral(self) -> bool:
        return bool(np.all(self._m == np.floor(self._m)))


class WeightedMetricSpace:
    """Points with demand weights and a distance oracle.

    Parameters
    ----------
    oracle : DenseOracle or compatible object
    weights : array-like of nonnegative demands, one per point
    labels : optional sequence of per-point labels (None entries allowed)
    pseudometric : whether zero distance between distinct points is legal
    tie_priority : optional removal-priority list for tie breaking, highest
        priority first
    source : serialization hint used by :mod:`kmedian.io` (``{"type": ...}``)
    """

    def __init__(self, oracle, weights, labels=None, *, pseudometric=False,
                 tie_priority=None, source=None):
        self._oracle = oracle
        n = oracle.n
        w = check_weights(weights, n)
        if n < 1:
            raise InputError("a space needs at least one point")
        self.weights = w
        self.weights.setflags(write=False)
        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n:
                raise InputError(f"got {len(labels)} labels for {n} points")
        self.labels = labels
        self.pseudometric = bool(pseudometric)
        if tie_priority is not None:
            tie_priority = tuple(int(p) for p in tie_priority)
            seen = set()
            for p in tie_priority:
                if not 0 <= p < n or p in seen:
                    raise InputError(f"tie_priority entry {p} invalid or repeated")
                seen.add(p)
        self.tie_priority = tie_priority
        self.source = source
        self._diameter = None
        self._integral = None

    # -- basics ------------------------------------------------------------

    @classmethod
    def from_matrix(cls, matrix, weights=None, **kwargs):
        m = check_square_distance_matrix(matrix)
        if weights is None:
            weights = np.ones(m.shape[0])
        return cls(DenseOracle(m), weights, **kwargs)

    @property
    def n_points(self) -> int:
        return self._oracle.n

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def is_integral(self) -> bool:
        """True when every distance and weight is an integer value.

        Integral instances admit exact comparisons; checks on them run with
        zero tolerance.
        """
        if self._integral is None:
            self._integral = bool(
                self._oracle.integral and np.all(self.weights == np.floor(self.weights))
            )
        return self._integral

    def _check_id(self, x) -> int:
        x = int(x)
        if not 0 <= x < self.n_points:
            raise InputError(f"point id {x} out of range [0, {self.n_points})")
        return x

    def facility_set(self, ids) -> tuple[int, ...]:
        """Normalize an iterable of point ids to a sorted, validated tuple."""
        members = sorted({self._check_id(i) for i in ids})
        return tuple(members)

    def id_of_label(self, label: str) -> int:
        if self.labels is not None:
            for i, lab in enumerate(self.labels):
                if lab == label:
                    return i
        raise InputError(f"no point labeled {label!r}")

    def distance(self, a, b) -> float:
        return self._oracle.distance(self._check_id(a), self._check_id(b))

    def row(self, i) -> np.ndarray:
        """Distances from point ``i`` to every point, as a float64 vector."""
        return self._oracle.row(self._check_id(i))

    def matrix(self) -> np.ndarray:
        """Full distance matrix; refused above DENSE_LIMIT points."""
        if self.n_points > DENSE_LIMIT:
            raise BudgetExceededError(
                f"dense matrix for {self.n_points} points exceeds the "
                f"{DENSE_LIMIT}-point limit"
            )
        return self._oracle.matrix()

    def diameter(self) -> float:
        if self._diameter is None:
            best = 0.0
            for i in range(self.n_points):
                best = max(best, float(self.row(i).max()))
            self._diameter = best
        return self._diameter

    # -- service-cost operations --------------------------------------------

    def _facility_distances(self, F) -> np.ndarray:
        """(n, |F|) distance block from every point to each facility."""
        m = getattr(self._oracle, "_m", None)
        if m is not None:
            return m[:, F]
        return np.stack([self._oracle.row(f) for f in F], axis=1)

    def nearest_distances(self, F) -> np.ndarray:
        """Per-point distance to the nearest facility in ``F``."""
        F = self.facility_set(F)
        if not F:
            raise DomainError("facility set is empty")
        return self._facility_distances(F).min(axis=1)

    def cost(self, F) -> float:
        """Total weighted service cost of facility set ``F``."""
        return float(np.dot(self.weights, self.nearest_distances(F)))

    def nearest_facility(self, x, F) -> tuple[int, float]:
        """Nearest facility to ``x`` and its distance; ties go to the
        smallest facility id."""
        x = self._check_id(x)
        F = self.facility_set(F)
        if not F:
            raise DomainError("facility set is empty")
        d = self.row(x)[list(F)]
        j = int(np.argmin(d))  # first minimum = smallest id, F is sorted
        return F[j], float(d[j])

    def assignment(self, F) -> "Assignment":
        """Nearest (and, when available, second-nearest) facility per point."""
        F = self.facility_set(F)
        if not F:
            raise DomainError("facility set is empty")
        block = self._facility_distances(F)
        fac = np.asarray(F)
        j1 = block.argmin(axis=1)
        d1 = block[np.arange(len(block)), j1]
        if len(F) < 2:
            return Assignment(fac[j1], d1, None, None)
        masked = block.copy()
        masked[np.arange(len(block)), j1] = np.inf
        j2 = masked.argmin(axis=1)
        d2 = masked[np.arange(len(block)), j2]
        return Assignment(fac[j1], d1, fac[j2], d2)

    def serving_set(self, R, M) -> tuple[int, ...]:
        """Facilities of ``R`` that serve the points of ``M``.

        The result Q satisfies d(m, Q) == d(m, R) for every m in M, with the
        smallest-id rule picking among equally near facilities, so |Q| <= |M|.
        """
        R = self.facility_set(R)
        if not R:
            raise DomainError("facility set is empty")
        M = self.facility_set(M)
        return tuple(sorted({self.nearest_facility(m, R)[0] for m in M}))


class Assignment:
    """Per-point nearest / second-nearest facility witnesses."""

    __slots__ = ("nearest", "nearest_dist", "second", "second_dist")

    def __init__(self, nearest, nearest_dist, second, second_dist):
        self.nearest = nearest
        self.nearest_dist = nearest_dist
        self.second = second
        self.second_dist = second_dist


def verify_metric(space: WeightedMetricSpace, tolerance=None) -> BoundReport:
    """Check reflexivity, symmetry, nonnegativity, and the triangle inequality.

    Runs over all pairs and triples (O(n^3)) and reports the first violating
    witness.  Zero distances between distinct points are violations unless the
    space allows pseudometrics.  Violations are reported, never raised.
    """
    if tolerance is None:
        tolerance = 0.0 if space.is_integral else 1e-9
    n = space.n_points

    def fail(witness, lhs, rhs):
        return BoundReport("metric", False, lhs, rhs, witness=witness,
                           tolerance=tolerance)

    for i in range(n):
        r = space.row(i)
        if r[i] != 0.0:
            return fail(f"d({i},{i})={r[i]!r} != 0", float(r[i]), 0.0)
        neg = np.where(r < 0)[0]
        if neg.size:
            j = int(neg[0])
            return fail(f"d({i},{j})={r[j]!r} < 0", float(r[j]), 0.0)
        if not space.pseudometric:
            zero = np.where(r == 0)[0]
            zero = zero[zero != i]
            if zero.size:
                j = int(zero[0])
                return fail(f"d({i},{j})=0 with {i} != {j} (pseudometric not allowed)",
                            0.0, 0.0)
    m = None
    if n <= DENSE_LIMIT:
        m = space.matrix()
    if m is not None:
        asym = np.argwhere(m != m.T)
        if asym.size:
            i, j = (int(v) for v in asym[0])
            return fail(f"d({i},{j})={float(m[i, j])!r} != d({j},{i})",
                        float(m[i, j]), float(m[j, i]))
    else:
        for i in range(n):
            ri = space.row(i)
            for j in range(i + 1, n):
                if ri[j] != space.distance(j, i):
                    return fail(f"d({i},{j})={float(ri[j])!r} != d({j},{i})",
                                float(ri[j]), space.distance(j, i))
    # triangle: for every mid point y, d(x,z) <= d(x,y) + d(y,z)
    worst = 0.0
    for y in range(n):
        ry = space.row(y)
        if m is not None:
            viol = m - (m[:, y:y + 1] + ry[None, :])
            worst = max(worst, float(viol.max()))
            bad = np.argwhere(viol > tolerance)
            if bad.size:
                x, z = (int(v) for v in bad[0])
                return fail(f"d({x},{z}) > d({x},{y}) + d({y},{z})",
                            float(m[x, z]), float(m[x, y] + m[y, z]))
        else:
            for x in range(n):
                rx = space.row(x)
                viol = rx - (rx[y] + ry)
                worst = max(worst, float(viol.max()))
                bad = np.where(viol > tolerance)[0]
                if bad.size:
                    z = int(bad[0])
                    return fail(f"d({x},{z}) > d({x},{y}) + d({y},{z})",
                                float(rx[z]), float(rx[y] + ry[z]))
    return BoundReport("metric", True, worst, 0.0, witness="", tolerance=tolerance)


def graph_to_metric(edges, n=None, weights=None, labels=None, *,
                    pseudometric=False, tie_priority=None) -> WeightedMetricSpace:
    """Build a space whose distances are shortest-path lengths in a graph.

    ``edges`` is an iterable of (u, v, length) with nonnegative lengths over
    points 0..n-1.  A disconnected graph is rejected, naming an unreachable
    pair.
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import shortest_path

    edges = [(int(u), int(v), float(w)) for u, v, w in edges]
    if n is None:
        if not edges:
            raise InputError("empty edge list and no point count given")
        n = max(max(u, v) for u, v, _ in edges) + 1
    for u, v, w in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"edge ({u},{v}) references a point outside 0..{n - 1}")
        if w < 0:
            raise InputError(f"edge ({u},{v}) has negative length {w}")
    if n > DENSE_LIMIT:
        raise BudgetExceededError(
            f"graph with {n} points exceeds the dense limit {DENSE_LIMIT}")
    rows = [u for u, v, _ in edges] + [v for u, v, _ in edges]
    cols = [v for u, v, _ in edges] + [u for u, v, _ in edges]
    vals = [w for _, _, w in edges] * 2
    g = coo_matrix((vals, (rows, cols)), shape=(n, n))
    dist = shortest_path(g, method="D", directed=False)
    unreachable = np.argwhere(np.isinf(dist))
    if unreachable.size:
        a, b = (int(x) for x in unreachable[0])
        raise InputError(f"graph is disconnected: no path between {a} and {b}")
    dist = np.minimum(dist, dist.T)  # guard against tiny Dijkstra asymmetries
    np.fill_diagonal(dist, 0.0)
    if weights is None:
        weights = np.ones(n)
    return WeightedMetricSpace(
        DenseOracle(dist), weights, labels, pseudometric=pseudometric,
        tie_priority=tie_priority,
        source={"type": "graph", "edges": [[u, v, w] for u, v, w in edges]},
    )
