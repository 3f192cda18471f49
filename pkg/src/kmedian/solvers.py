"""Greedy and exact k-median solvers with full removal/addition traces.

Reverse greedy starts from all points open and repeatedly closes the
facility whose removal increases total service cost the least, down to one
facility; a run for any target k is the prefix of that single chain, which
is what makes the algorithm oblivious to k.  Two implementations are
provided: a fast one built on incremental nearest/second-nearest
maintenance with a lazily invalidated removal-cost heap, and a naive
reference that recomputes every candidate cost from scratch.  Under the
same tie policy they produce identical traces; the reference exists as the
correctness oracle for the fast path.

Cost bookkeeping convention: every recorded cost is ``dot(weights, d1)``
where ``d1`` holds per-client distances to the nearest open facility.  Both
reverse implementations derive ``d1`` as exact copies of oracle entries, so
their recorded traces agree bit for bit, not just within tolerance.
"""

from __future__ import annotations

import csv
import heapq
import itertools
import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DomainError, InputError
from .space import DENSE_LIMIT, WeightedMetricSpace
from .validation import check_k


@dataclass(frozen=True)
class TiePolicy:
    """Deterministic rule selecting among equal-cost candidates.

    ``lexicographic`` picks the smallest point id; ``priority`` ranks listed
    points first (in list order) and unlisted ones after, by id;
    ``seeded_random`` draws uniformly among the exact minimizers with a
    per-run RNG, so identical seeds reproduce identical traces.
    """

    kind: str
    priority: tuple[int, ...] | None = None
    seed: int | None = None

    @staticmethod
    def lexicographic() -> "TiePolicy":
        return TiePolicy("lexicographic")

    @staticmethod
    def from_priority(ids) -> "TiePolicy":
        ids = tuple(int(i) for i in ids)
        if len(set(ids)) != len(ids):
            raise InputError("priority list has repeated ids")
        return TiePolicy("priority", priority=ids)

    @staticmethod
    def seeded_random(seed: int) -> "TiePolicy":
        return TiePolicy("seeded_random", seed=int(seed))

    def rank_array(self, n: int) -> np.ndarray:
        """Per-point rank; lower wins among equal-cost candidates."""
        ranks = np.arange(n, dtype=np.int64)
        if self.kind == "priority":
            ranks += len(self.priority)
            for pos, p in enumerate(self.priority):
                if not 0 <= p < n:
                    raise InputError(f"priority id {p} out of range [0, {n})")
                ranks[p] = pos
        elif self.kind not in ("lexicographic", "seeded_random"):
            raise InputError(f"unknown tie policy kind {self.kind!r}")
        return ranks

    def start(self) -> "_TieState":
        rng = random.Random(self.seed) if self.kind == "seeded_random" else None
        return _TieState(rng)


class _TieState:
    """Per-run tie-breaking state (holds the RNG for seeded_random)."""

    def __init__(self, rng):
        self.rng = rng

    def choose(self, candidates, rank) -> int:
        """Pick one point from the exact-minimizer set."""
        if len(candidates) == 1:
            return candidates[0]
        if self.rng is None:
            return min(candidates, key=lambda c: rank[c])
        ordered = sorted(candidates)
        return ordered[self.rng.randrange(len(ordered))]


@dataclass(frozen=True)
class TraceStep:
    """One removal (reverse) or addition (forward).

    ``step`` is the facility count before a removal, or after an addition,
    matching the chain indices R_n, ..., R_k and F_1, ..., F_k.
    """

    step: int
    point: int
    cost_before: float
    cost_after: float
    delta: float


@dataclass(frozen=True)
class GreedyTrace:
    direction: str  # "reverse" | "forward"
    k_target: int
    steps: tuple[TraceStep, ...]
    final_set: tuple[int, ...]

    @property
    def final_cost(self) -> float:
        if self.steps:
            return self.steps[-1].cost_after
        return 0.0


def truncate_chain(trace: GreedyTrace, k: int) -> GreedyTrace:
    """Stop a reverse chain early, at k facilities.

    The chain is computed once down to a single facility; any larger target
    is a prefix of it, so truncation is a pure trace operation.
    """
    if trace.direction != "reverse":
        raise InputError("only reverse traces can be truncated")
    n = trace.k_target + len(trace.steps)
    if not trace.k_target <= k <= n:
        raise InputError(f"k={k} outside [{trace.k_target}, {n}]")
    kept = tuple(s for s in trace.steps if s.step > k)
    restored = [s.point for s in trace.steps if s.step <= k]
    final = tuple(sorted(set(trace.final_set) | set(restored)))
    return GreedyTrace("reverse", k, kept, final)


# ---------------------------------------------------------------------------
# nearest / second-nearest maintenance


class NearestTracker:
    """Per-client nearest and second-nearest open facility.

    Starts with every point open.  After a removal, only clients whose
    nearest or second-nearest was the removed facility are rescanned (one
    vectorized pass over the open facilities).  Ties go to the smallest
    facility id.  Distances are exact copies of oracle entries; no
    arithmetic is performed on them.
    """

    def __init__(self, space: WeightedMetricSpace):
        n = space.n_points
        self.space = space
        self._m = None
        if n <= DENSE_LIMIT:
            self._m = space.matrix()
        self.open = np.ones(n, dtype=bool)
        self.open_count = n
        self._open_ids = None  # lazily rebuilt sorted open-id array
        self.near1 = np.empty(n, dtype=np.int64)
        self.near2 = np.empty(n, dtype=np.int64)
        self.d1 = np.empty(n, dtype=np.float64)
        self.d2 = np.empty(n, dtype=np.float64)
        self._rescan(np.arange(n))

    def open_ids(self) -> np.ndarray:
        if self._open_ids is None:
            self._open_ids = np.flatnonzero(self.open)
        return self._open_ids

    def _rescan(self, clients):
        ids = self.open_ids()
        if self._m is not None:
            self._rescan_block(self._m[clients][:, ids], clients, ids)
            return
        # row-oracle spaces can be too large to materialize; bound the block
        chunk = max(1, (1 << 22) // max(1, len(ids)))
        clients = np.asarray(clients)
        for lo in range(0, len(clients), chunk):
            part = clients[lo:lo + chunk]
            block = np.stack([self.space.row(int(c)) for c in part])[:, ids]
            self._rescan_block(block, part, ids)

    def _rescan_block(self, block, clients, ids):
        rows = np.arange(len(clients))
        j1 = block.argmin(axis=1)
        self.near1[clients] = ids[j1]
        self.d1[clients] = block[rows, j1]
        if len(ids) >= 2:
            block[rows, j1] = np.inf
            j2 = block.argmin(axis=1)
            self.near2[clients] = ids[j2]
            self.d2[clients] = block[rows, j2]
        else:
            self.near2[clients] = -1
            self.d2[clients] = np.inf

    def remove(self, f: int) -> np.ndarray:
        """Close facility ``f``; returns the rescanned client ids."""
        if not self.open[f]:
            raise InputError(f"facility {f} already closed")
        self.open[f] = False
        self.open_count -= 1
        self._open_ids = None
        affected = np.flatnonzero((self.near1 == f) | (self.near2 == f))
        if self.open_count >= 1 and affected.size:
            self._rescan(affected)
        return affected


# ---------------------------------------------------------------------------
# reverse greedy


def _removal_cost_of(tracker, w, f) -> float:
    """Current cost increase if ``f`` were closed: clients served by f move
    to their second-nearest facility."""
    mask = tracker.near1 == f
    return float(np.dot(w[mask], tracker.d2[mask] - tracker.d1[mask]))


class _LazyRemovalHeap:
    """Removal-cost priority structure with lazy invalidation.

    Every open facility always has at least one heap entry carrying its
    current removal cost; stale entries are dropped when popped.  A popped
    candidate is revalidated by recomputing its removal cost from the
    tracker before being accepted, which also repairs any float drift in
    the incrementally maintained values.
    """

    def __init__(self, tracker, w, rank):
        self.tracker = tracker
        self.w = w
        self.rank = rank
        n = len(w)
        self.current = np.bincount(
            tracker.near1, weights=w * (tracker.d2 - tracker.d1), minlength=n)
        self.heap = [(self.current[f], int(rank[f]), f) for f in range(n)]
        heapq.heapify(self.heap)

    def refresh(self, facilities):
        """Recompute the removal cost of the given facilities and push
        updated entries."""
        for g in facilities:
            g = int(g)
            if not self.tracker.open[g]:
                continue
            fresh = _removal_cost_of(self.tracker, self.w, g)
            if fresh != self.current[g]:
                self.current[g] = fresh
                heapq.heappush(self.heap, (fresh, int(self.rank[g]), g))

    def _pop_valid(self):
        """Pop entries until one matches a live, revalidated removal cost."""
        while True:
            delta, rk, f = heapq.heappop(self.heap)
            if not self.tracker.open[f] or delta != self.current[f]:
                continue
            fresh = _removal_cost_of(self.tracker, self.w, f)
            if fresh != self.current[f]:
                self.current[f] = fresh
                heapq.heappush(self.heap, (fresh, rk, f))
                continue
            return delta, rk, f

    def pop_minimizers(self, band: float):
        """Return candidates whose maintained removal cost is within ``band``
        of the minimum (band 0: just the rank-best exact minimizer set)."""
        delta, rk, f = self._pop_valid()
        cands = {f}
        while self.heap:
            if self.heap[0][0] > delta + band:
                break
            e_delta, e_rk, g = heapq.heappop(self.heap)
            if not self.tracker.open[g] or e_delta != self.current[g] or g in cands:
                continue
            fresh = _removal_cost_of(self.tracker, self.w, g)
            if fresh != self.current[g]:
                self.current[g] = fresh
                heapq.heappush(self.heap, (fresh, e_rk, g))
                continue
            cands.add(g)
        return delta, sorted(cands)

    def pop_best(self):
        """First valid pop; the heap key (cost, rank, id) already realizes
        lexicographic/priority tie breaking among exact minimizers."""
        _, _, f = self._pop_valid()
        return f

    def restore(self, facilities):
        for g in facilities:
            heapq.heappush(self.heap, (self.current[g], int(self.rank[g]), int(g)))


def _canonical_post_cost(tracker, w, f) -> float:
    """cost after closing f, written exactly as a from-scratch evaluation:
    clients of f fall back to their second-nearest facility."""
    return float(np.dot(w, np.where(tracker.near1 == f, tracker.d2, tracker.d1)))


def _reverse_chain_fast(space, tie: TiePolicy) -> GreedyTrace:
    n = space.n_points
    w = space.weights
    rank = tie.rank_array(n)
    state = tie.start()
    integral = space.is_integral
    tracker = NearestTracker(space)
    cost_now = float(np.dot(w, tracker.d1))
    steps = []
    if n > 1:
        heap = _LazyRemovalHeap(tracker, w, rank)
        while tracker.open_count > 1:
            j = tracker.open_count
            if integral and tie.kind != "seeded_random":
                chosen = heap.pop_best()
            elif integral:
                _, cands = heap.pop_minimizers(0.0)
                chosen = state.choose(cands, rank)
                heap.restore(g for g in cands if g != chosen)
            else:
                # On non-integral instances the decomposed removal costs can
                # differ from a from-scratch evaluation in the last ulps, and
                # mathematically tied candidates (e.g. mutual nearest
                # neighbors) are common.  Collect everything within a noise
                # band of the maintained minimum and settle ties on the
                # canonical post-cost, the value a from-scratch solver sees.
                _, cands = heap.pop_minimizers(1e-9 * (1.0 + abs(cost_now)))
                canon = {g: _canonical_post_cost(tracker, w, g) for g in cands}
                best = min(canon.values())
                exact = [g for g in cands if canon[g] == best]
                chosen = state.choose(exact, rank)
                heap.restore(g for g in cands if g != chosen)
            affected = tracker.remove(chosen)
            cost_after = float(np.dot(w, tracker.d1))
            steps.append(TraceStep(j, int(chosen), cost_now, cost_after,
                                   cost_after - cost_now))
            cost_now = cost_after
            if tracker.open_count > 1:
                # only facilities now serving a rescanned client can have a
                # changed removal cost
                dirty = set(tracker.near1[affected].tolist()) - {chosen}
                heap.refresh(dirty)
    final = tuple(int(i) for i in tracker.open_ids())
    return GreedyTrace("reverse", 1, tuple(steps), final)


def _reverse_chain_reference(space, tie: TiePolicy) -> GreedyTrace:
    """Naive chain: every candidate's post-removal cost recomputed from
    scratch at every step (O(n^2) work per step)."""
    n = space.n_points
    w = space.weights
    rank = tie.rank_array(n)
    state = tie.start()
    m = space.matrix()
    open_ids = list(range(n))
    cost_now = float(np.dot(w, m[:, open_ids].min(axis=1)))
    steps = []
    while len(open_ids) > 1:
        j = len(open_ids)
        arr = np.asarray(open_ids)
        best_cost = None
        cands = []
        for idx, r in enumerate(open_ids):
            rest = np.delete(arr, idx)
            c = float(np.dot(w, m[:, rest].min(axis=1)))
            if best_cost is None or c < best_cost:
                best_cost, cands = c, [r]
            elif c == best_cost:
                cands.append(r)
        chosen = state.choose(cands, rank)
        open_ids.remove(chosen)
        steps.append(TraceStep(j, chosen, cost_now, best_cost,
                               best_cost - cost_now))
        cost_now = best_cost
    return GreedyTrace("reverse", 1, tuple(steps), tuple(open_ids))


def reverse_greedy_chain(space, tie=None, algorithm="fast") -> GreedyTrace:
    """Full removal chain down to one facility.

    Compute this once and :func:`truncate_chain` it for each k of interest.
    """
    tie = tie or TiePolicy.lexicographic()
    if algorithm == "fast":
        return _reverse_chain_fast(space, tie)
    if algorithm == "reference":
        return _reverse_chain_reference(space, tie)
    raise InputError(f"unknown algorithm {algorithm!r}")


def reverse_greedy(space, k, tie=None) -> GreedyTrace:
    """Reverse greedy down to k facilities (fast implementation)."""
    k = check_k(k, space.n_points)
    return truncate_chain(reverse_greedy_chain(space, tie, "fast"), k)


def reverse_greedy_reference(space, k, tie=None) -> GreedyTrace:
    """Reverse greedy via the naive reference; equals :func:`reverse_greedy`
    trace-for-trace under the same tie policy."""
    k = check_k(k, space.n_points)
    return truncate_chain(reverse_greedy_chain(space, tie, "reference"), k)


# ---------------------------------------------------------------------------
# forward greedy and the exact oracle


def forward_greedy(space, k, tie=None) -> GreedyTrace:
    """Add the facility that decreases total cost most, k times.

    The first row records cost_before = 0 by convention, so its delta is the
    absolute cost of the first facility; all later deltas are <= 0.
    """
    k = check_k(k, space.n_points)
    tie = tie or TiePolicy.lexicographic()
    n = space.n_points
    w = space.weights
    rank = tie.rank_array(n)
    state = tie.start()
    d1 = np.full(n, np.inf)
    chosen_set = []
    remaining = list(range(n))
    steps = []
    cost_now = 0.0
    for step_num in range(1, k + 1):
        best_cost = None
        cands = []
        for f in remaining:
            c = float(np.dot(w, np.minimum(d1, space.row(f))))
            if best_cost is None or c < best_cost:
                best_cost, cands = c, [f]
            elif c == best_cost:
                cands.append(f)
        chosen = state.choose(cands, rank)
        d1 = np.minimum(d1, space.row(chosen))
        chosen_set.append(chosen)
        remaining.remove(chosen)
        steps.append(TraceStep(step_num, chosen, cost_now, best_cost,
                               best_cost - cost_now))
        cost_now = best_cost
    return GreedyTrace("forward", k, tuple(steps), tuple(sorted(chosen_set)))


DEFAULT_SUBSET_BUDGET = 10_000_000


def exact_kmedian(space, k, budget=DEFAULT_SUBSET_BUDGET):
    """Globally optimal k-median by exhaustive enumeration.

    k=1 is always a linear scan; otherwise C(n, k) must fit the subset
    budget.  Ties are resolved lexicographically on the member tuple.
    """
    n = space.n_points
    k = check_k(k, n)
    w = space.weights
    if k == 1:
        best, best_cost = 0, float(np.dot(w, space.row(0)))
        for f in range(1, n):
            c = float(np.dot(w, space.row(f)))
            if c < best_cost:
                best, best_cost = f, c
        return (best,), best_cost
    n_subsets = math.comb(n, k)
    if n_subsets > budget:
        raise BudgetExceededError(
            f"C({n},{k}) = {n_subsets:,} subsets exceed the budget {budget:,}")
    m = space.matrix()
    best = None
    best_cost = math.inf
    for comb in itertools.combinations(range(n), k):
        c = float(np.dot(w, m[:, comb].min(axis=1)))
        if c < best_cost:
            best, best_cost = comb, c
    return best, best_cost


def removal_delta(space, R, r) -> float:
    """cost(R minus r) - cost(R); always nonnegative."""
    R = space.facility_set(R)
    r = int(r)
    if r not in R:
        raise InputError(f"facility {r} not in the set")
    if len(R) < 2:
        raise DomainError("cannot price removing the last facility")
    rest = tuple(x for x in R if x != r)
    return space.cost(rest) - space.cost(R)


# ---------------------------------------------------------------------------
# trace serialization

TRACE_HEADER = ["step", "removed_or_added", "cost_before", "cost_after", "delta"]


def write_trace_csv(trace: GreedyTrace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for s in trace.steps:
            writer.writerow([s.step, s.point, repr(s.cost_before),
                             repr(s.cost_after), repr(s.delta)])


def read_trace_csv(path, space) -> GreedyTrace:
    """Rebuild a trace from CSV; the space supplies the point universe needed
    to reconstruct the final facility set of a reverse trace."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise InputError(f"unexpected trace header {header}")
        steps = [TraceStep(int(r[0]), int(r[1]), float(r[2]), float(r[3]), float(r[4]))
                 for r in reader]
    n = space.n_points
    if not steps:
        return GreedyTrace("reverse", n, (), tuple(range(n)))
    seen = [s.step for s in steps]
    if seen == list(range(n, n - len(steps), -1)) and n - len(steps) >= 1:
        removed = {s.point for s in steps}
        final = tuple(i for i in range(n) if i not in removed)
        return GreedyTrace("reverse", n - len(steps), tuple(steps), final)
    if seen == list(range(1, len(steps) + 1)):
        return GreedyTrace("forward", len(steps), tuple(steps),
                           tuple(sorted(s.point for s in steps)))
    raise InputError("trace steps match neither a reverse nor a forward run")
