"""Instance generators: layered-tree and star adversarial families, widely
separated copies, seeded random instances, and the epsilon floor transform.

The layered-tree family is the adversarial construction on which reverse
greedy drifts away from the optimum: a tree with levels 1..h (leaves at
level 1, root ``rho`` at level h) where every node at level j > 1 has
(j+1)^3 children and carries weight (j!)^3, plus an extra point ``mu`` of
weight 1 adjacent to all leaves.  Edges have unit length and distances are
shortest-path lengths in that graph.  Clusters of coincident points are
collapsed into node weights instead of being materialized, which keeps the
point count polynomial in the weight total; the emitted metadata records
this.

Point ids are assigned so that ``mu`` is 0, tree nodes follow by ascending
level (leaves first), and ``rho`` is the last id.  The emitted tie-priority
list (mu first, then ascending level, within a level by id) realizes the
favorable tie-breaking under which reverse greedy climbs the tree.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import BudgetExceededError, InputError
from .space import DENSE_LIMIT, DenseOracle, WeightedMetricSpace, graph_to_metric
from .validation import check_positive_int

MAX_TREE_LEVELS = 4


def _tree_counts(h: int) -> list[int]:
    """Nodes per level 1..h (index 0 unused)."""
    counts = [0] * (h + 1)
    counts[h] = 1
    for j in range(h, 1, -1):
        counts[j - 1] = counts[j] * (j + 1) ** 3
    return counts


class TreeStructure:
    """Index arithmetic for the layered tree (plus the extra point ``mu``).

    Tree nodes at level j occupy a contiguous id block; each node covers a
    contiguous range of leaves, which makes ancestor tests O(1) and lets
    :class:`TreeOracle` compute distance rows without a matrix.
    """

    def __init__(self, h: int):
        self.h = h
        self.counts = _tree_counts(h)
        self.n = 1 + sum(self.counts[1:])
        self.level_start = [0] * (h + 2)
        self.level_start[1] = 1
        for j in range(1, h + 1):
            self.level_start[j + 1] = self.level_start[j] + self.counts[j]
        # leaves under one level-j subtree
        self.leaves_per = [0] + [self.counts[1] // self.counts[j] for j in range(1, h + 1)]
        level = np.zeros(self.n, dtype=np.int64)
        leaf_lo = np.zeros(self.n, dtype=np.int64)
        for j in range(1, h + 1):
            s, c = self.level_start[j], self.counts[j]
            level[s:s + c] = j
            leaf_lo[s:s + c] = np.arange(c) * self.leaves_per[j]
        self.level = level
        self.leaf_lo = leaf_lo

    def node_id(self, j: int, q: int) -> int:
        return self.level_start[j] + q

    def level_ids(self, j: int) -> range:
        s = self.level_start[j]
        return range(s, s + self.counts[j])

    def parent(self, x: int) -> int:
        """Tree parent id, or -1 for the root and for mu."""
        j = int(self.level[x])
        if x == 0 or j == self.h:
            return -1
        q = x - self.level_start[j]
        return self.node_id(j + 1, q // (j + 2) ** 3)

    def ancestor(self, x: int, at_level: int) -> int:
        q = int(self.leaf_lo[x]) // self.leaves_per[at_level]
        return self.node_id(at_level, q)

    def node_weight(self, j: int) -> int:
        return math.factorial(j) ** 3

    def subtree_weight(self, x: int) -> int:
        """Total weight of the subtree rooted at tree node ``x`` (inclusive)."""
        j = int(self.level[x])
        total = 0
        for i in range(1, j + 1):
            total += self.node_weight(i) * (self.counts[i] // self.counts[j])
        return total


class TreeOracle:
    """Implicit distance oracle for the layered tree instance.

    Distances are computed analytically from levels and ancestor ranges:
    the path between two tree nodes either stays in the tree (twice the
    lowest common ancestor's level minus both levels) or hops through mu
    (sum of the levels), whichever is shorter.  Memory stays O(n); a dense
    matrix is materialized lazily only for small instances.
    """

    def __init__(self, tree: TreeStructure):
        self.tree = tree
        self.n = tree.n
        self.integral = True
        self._matrix = None

    def _lca_level(self, a: int, b: int) -> int:
        t = self.tree
        la, lb = int(t.level[a]), int(t.level[b])
        for L in range(max(la, lb), t.h + 1):
            if t.ancestor(a, L) == t.ancestor(b, L):
                return L
        return t.h

    def distance(self, a: int, b: int) -> float:
        if a == b:
            return 0.0
        t = self.tree
        if a == 0 or b == 0:
            return float(t.level[a + b])  # mu to a level-j node costs j
        la, lb = int(t.level[a]), int(t.level[b])
        through_tree = 2 * self._lca_level(a, b) - la - lb
        return float(min(through_tree, la + lb))

    def row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        t = self.tree
        levels = t.level
        if i == 0:
            return levels.astype(np.float64)
        li = int(levels[i])
        lca = np.full(self.n, t.h, dtype=np.int64)
        for L in range(t.h - 1, li - 1, -1):
            anc = t.ancestor(i, L)
            lo = t.leaf_lo[anc]
            hi = lo + t.leaves_per[L]
            inside = (t.leaf_lo >= lo) & (t.leaf_lo < hi) & (levels <= L)
            lca[inside] = L
        through_tree = 2 * lca - li - levels
        out = np.minimum(through_tree, li + levels).astype(np.float64)
        out[0] = float(li)
        out[i] = 0.0
        return out

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = np.empty((self.n, self.n), dtype=np.float64)
            for i in range(self.n):
                m[i] = self.row(i)
            m.setflags(write=False)
            self._matrix = m
        return self._matrix


def tree_instance_size(h: int) -> int:
    return 1 + sum(_tree_counts(h)[1:])


def gen_tree_lb(h: int) -> WeightedMetricSpace:
    """Layered-tree instance with h levels; see the module docstring.

    h=4 already has 224,127 weighted points and is supported only through
    the implicit oracle; h >= 5 is refused outright.
    """
    h = check_positive_int(h, "h")
    if h > MAX_TREE_LEVELS:
        raise InputError(
            f"h={h} refused: the instance would have {tree_instance_size(h):,} "
            f"weighted points (h <= {MAX_TREE_LEVELS} supported)")
    tree = TreeStructure(h)
    weights = np.ones(tree.n)
    labels = [None] * tree.n
    labels[0] = "mu"
    labels[tree.n - 1] = "rho"
    for j in range(1, h + 1):
        ids = tree.level_ids(j)
        weights[ids.start:ids.stop] = tree.node_weight(j)
    space = WeightedMetricSpace(
        TreeOracle(tree), weights, labels,
        pseudometric=False,
        tie_priority=range(tree.n),
        source={"type": "tree_lb", "h": h},
    )
    space.meta = {"generator": "tree_lb", "h": h,
                  "clusters_collapsed_to_weights": True}
    return space


def tree_lb_edges(h: int) -> list[tuple[int, int, float]]:
    """Explicit unit-length edge list of the layered tree plus mu."""
    h = check_positive_int(h, "h")
    if h > MAX_TREE_LEVELS:
        raise InputError(f"h={h} refused (h <= {MAX_TREE_LEVELS} supported)")
    tree = TreeStructure(h)
    edges = []
    for j in range(1, h):
        for x in tree.level_ids(j):
            edges.append((x, tree.parent(x), 1.0))
    for leaf in tree.level_ids(1):
        edges.append((0, leaf, 1.0))
    return edges


def gen_star(j: int, w: float) -> WeightedMetricSpace:
    """Star-of-arms instance: mu at the hub, arm tips x_i of weight w, and
    pendant points y_i.

    mu connects to every x_i by a unit edge; x_i connects to y_i by a unit
    edge and to every other y_l by an edge of length 2.  On this instance
    the single-removal cost of the all-y facility set nearly matches its
    upper bound, which makes it the tightness fixture for that check.
    """
    j = check_positive_int(j, "j")
    w = float(w)
    if w < 1:
        raise InputError(f"cluster weight w must be >= 1, got {w}")
    n = 2 * j + 1
    weights = np.ones(n)
    weights[1:j + 1] = w
    labels = ["mu"] + [f"x{i}" for i in range(1, j + 1)] + [f"y{i}" for i in range(1, j + 1)]
    edges = []
    for i in range(1, j + 1):
        edges.append((0, i, 1.0))
        edges.append((i, j + i, 1.0))
        for l in range(1, j + 1):
            if l != i:
                edges.append((i, j + l, 2.0))
    space = graph_to_metric(edges, n=n, weights=weights, labels=labels)
    space.meta = {"generator": "star", "j": j, "w": w,
                  "clusters_collapsed_to_weights": True}
    return space


def gen_k_copies(base: WeightedMetricSpace, k: int, separation=None) -> WeightedMetricSpace:
    """k widely separated copies of ``base``.

    Every cross-copy distance equals ``separation``.  The default,
    4 * diameter * total weight, makes serving across copies strictly worse
    than serving a whole copy from any internal facility, so optimal and
    greedy solutions decompose per copy.  Separations below twice the
    diameter are rejected because they would break that isolation (and,
    below half the diameter, the triangle inequality itself).
    """
    k = check_positive_int(k, "k")
    n = base.n_points
    if n * k > DENSE_LIMIT:
        raise BudgetExceededError(
            f"{k} copies of {n} points exceed the dense limit {DENSE_LIMIT}")
    if k == 1 and separation is None:
        return base
    diam = base.diameter()
    if separation is None:
        separation = 4.0 * diam * base.total_weight
        if separation == 0.0:
            separation = 1.0
    separation = float(separation)
    if separation < 2.0 * diam:
        raise InputError(
            f"separation {separation} < 2 * diameter ({2.0 * diam}) would let "
            f"copies interact")
    m = base.matrix()
    big = np.full((n * k, n * k), separation, dtype=np.float64)
    for c in range(k):
        big[c * n:(c + 1) * n, c * n:(c + 1) * n] = m
    weights = np.tile(base.weights, k)
    labels = None
    if base.labels is not None:
        labels = [f"{lab}@{c}" if lab is not None else None
                  for c in range(k) for lab in base.labels]
    priority = None
    if base.tie_priority is not None:
        priority = [c * n + p for c in range(k) for p in base.tie_priority]
    space = WeightedMetricSpace(
        DenseOracle(big), weights, labels,
        pseudometric=base.pseudometric, tie_priority=priority,
        source={"type": "dense"},
    )
    space.meta = {"generator": "k_copies", "k": k, "separation": separation}
    return space


RANDOM_KINDS = ("unit_square_points", "random_graph")


def gen_random(n: int, kind: str, seed: int) -> WeightedMetricSpace:
    """Seeded random instance with unit weights.

    ``unit_square_points`` draws points uniformly in the unit square with
    Euclidean distances; ``random_graph`` draws a connected graph (random
    attachment tree plus extra edges) with integer lengths in [1, 10] and
    takes shortest-path distances.  The same seed reproduces the instance
    bit for bit.
    """
    n = check_positive_int(n, "n")
    if kind not in RANDOM_KINDS:
        raise InputError(f"unknown random kind {kind!r}; expected one of {RANDOM_KINDS}")
    rng = np.random.default_rng(seed)
    if kind == "unit_square_points":
        from scipy.spatial.distance import cdist

        pts = rng.random((n, 2))
        m = cdist(pts, pts)
        m = np.minimum(m, m.T)
        np.fill_diagonal(m, 0.0)
        space = WeightedMetricSpace.from_matrix(m, source={"type": "dense"})
    else:
        edges = []
        seen = set()
        for v in range(1, n):
            u = int(rng.integers(0, v))
            edges.append((u, v, float(rng.integers(1, 11))))
            seen.add((u, v))
        for _ in range(n // 2):
            u = int(rng.integers(0, n))
            v = int(rng.integers(0, n))
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            edges.append((key[0], key[1], float(rng.integers(1, 11))))
        space = graph_to_metric(edges, n=n)
    space.meta = {"generator": "random", "n": n, "kind": kind, "seed": int(seed)}
    return space


def epsilon_perturb(space: WeightedMetricSpace, eps: float) -> WeightedMetricSpace:
    """Lift every off-diagonal distance to at least ``eps``.

    Turns a pseudometric into a true metric while changing the cost of any
    facility set by at most eps * total weight.  ``eps`` must stay below
    half the smallest positive distance so that only zero distances move.
    """
    eps = float(eps)
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    m = space.matrix()
    off = ~np.eye(space.n_points, dtype=bool)
    positive = m[off & (m > 0)]
    if positive.size:
        smallest = float(positive.min())
        if eps >= smallest / 2:
            raise InputError(
                f"eps={eps} too large: must be below half the smallest positive "
                f"distance {smallest}")
    out = np.where(off, np.maximum(m, eps), 0.0)
    space2 = WeightedMetricSpace(
        DenseOracle(out), space.weights.copy(), space.labels,
        pseudometric=False, tie_priority=space.tie_priority,
        source={"type": "dense"},
    )
    space2.meta = {"generator": "epsilon_perturb", "eps": eps}
    return space2
