"""Empirical checks of the cost bounds behind the greedy heuristics, plus
the ball-replay instrumentation.

Each check evaluates one inequality exactly and returns a
:class:`~kmedian.report.BoundReport`; nothing here proves anything, but a
single violation on a metric-valid instance means a solver or generator
bug, so the fuzz drivers treat any failed report as fatal.

Tolerances: zero on integral instances (all generated adversarial families
are integer-valued, so those comparisons are exact), 1e-9 absolute
otherwise.  Ratio-valued checks always use 1e-9.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .generators import gen_random
from .report import BoundReport
from .solvers import (GreedyTrace, NearestTracker, exact_kmedian,
                      reverse_greedy_chain, truncate_chain)
from .space import WeightedMetricSpace

FLOAT_TOL = 1e-9


def check_tolerance(space: WeightedMetricSpace) -> float:
    return 0.0 if space.is_integral else FLOAT_TOL


def harmonic_number(m: int) -> float:
    """H_m = sum_{i=1}^m 1/i, with H_0 = 0."""
    return sum(1.0 / i for i in range(1, m + 1))


def check_serving_set_bound(space, R, M) -> BoundReport:
    """For Q = the facilities of R serving M, every point x must satisfy
    d(x, Q) <= 2 d(x, M) + d(x, R).

    Reported lhs/rhs belong to the tightest point; a violation anywhere
    fails the check.
    """
    R = space.facility_set(R)
    M = space.facility_set(M)
    if not R or not M:
        raise DomainError("serving-set bound needs nonempty R and M")
    Q = space.serving_set(R, M)
    dR = space.nearest_distances(R)
    dM = space.nearest_distances(M)
    dQ = space.nearest_distances(Q)
    tol = check_tolerance(space)
    gap = dQ - (2.0 * dM + dR)
    x = int(np.argmax(gap))
    return BoundReport(
        "lemma1", bool(gap[x] <= tol),
        lhs=float(dQ[x]), rhs=float(2.0 * dM[x] + dR[x]),
        witness=f"x={x};Q={','.join(map(str, Q))}", tolerance=tol)


def check_supermodularity(space, Q, R) -> BoundReport:
    """Sum of single-removal cost increases over R minus Q is at most
    cost(Q) - cost(R); holds for any proper nonempty subset Q of R."""
    Q = space.facility_set(Q)
    R = space.facility_set(R)
    if not Q or not set(Q) < set(R):
        raise InputError("Q must be a proper nonempty subset of R")
    cost_R = space.cost(R)
    lhs = 0.0
    for r in set(R) - set(Q):
        rest = tuple(x for x in R if x != r)
        lhs += space.cost(rest) - cost_R
    rhs = space.cost(Q) - cost_R
    tol = check_tolerance(space)
    return BoundReport(
        "supermod", bool(lhs <= rhs + tol), lhs=lhs, rhs=rhs,
        witness=f"|R\\Q|={len(R) - len(Q)}", tolerance=tol)


def check_step_bounds(space, trace: GreedyTrace, k: int,
                      opt_cost: float | None = None) -> list[BoundReport]:
    """Every reverse step at size j > k must increase the cost by at most
    2 * opt_k / (j - k), where opt_k is the exact k-median cost."""
    if trace.direction != "reverse":
        raise InputError("step bounds apply to reverse traces")
    if trace.k_target > k:
        raise InputError(f"trace stops at {trace.k_target} facilities, above k={k}")
    if opt_cost is None:
        _, opt_cost = exact_kmedian(space, k)
    tol = check_tolerance(space)
    reports = []
    for s in trace.steps:
        if s.step <= k:
            continue
        rhs = 2.0 * opt_cost / (s.step - k)
        reports.append(BoundReport(
            "stepbound", bool(s.delta <= rhs + tol), lhs=s.delta, rhs=rhs,
            witness=f"j={s.step};removed={s.point}", params=f"k={k}",
            tolerance=tol))
    return reports


def check_harmonic_ratio(space, k: int, tie=None, trace: GreedyTrace | None = None,
                         opt_cost: float | None = None) -> BoundReport:
    """Reverse greedy's cost is at most 2 H_{n-k} times the exact optimum.

    A zero optimum requires a zero greedy cost and reports ratio 1 (that
    case overrides the lhs <= rhs convention, since the bound is vacuous).
    """
    n = space.n_points
    if trace is None:
        trace = reverse_greedy_chain(space, tie)
    trace = truncate_chain(trace, k)
    alg_cost = trace.final_cost
    if opt_cost is None:
        _, opt_cost = exact_kmedian(space, k)
    rhs = 2.0 * harmonic_number(n - k)
    if opt_cost == 0.0:
        return BoundReport(
            "harmonic", bool(alg_cost == 0.0), lhs=1.0, rhs=rhs,
            witness="zero-optimum rule", params=f"k={k}", tolerance=FLOAT_TOL)
    lhs = alg_cost / opt_cost
    return BoundReport(
        "harmonic", bool(lhs <= rhs + FLOAT_TOL), lhs=lhs, rhs=rhs,
        witness=f"alg={alg_cost!r};opt={opt_cost!r}", params=f"k={k}",
        tolerance=FLOAT_TOL)


def check_min_removal_bound(space, R, opt1_cost: float | None = None) -> BoundReport:
    """The cheapest single removal from any j-element set costs at most
    2 * opt_1 / (j - 1), where opt_1 is the exact 1-median cost.

    The tightness ratio rhs/lhs is recoverable from the report fields; on
    the star family it approaches 2.2.
    """
    R = space.facility_set(R)
    j = len(R)
    if j < 2:
        raise DomainError("need at least two facilities to price a removal")
    cost_R = space.cost(R)
    best_r, lhs = None, math.inf
    for r in R:
        rest = tuple(x for x in R if x != r)
        d = space.cost(rest) - cost_R
        if d < lhs:
            best_r, lhs = r, d
    if opt1_cost is None:
        _, opt1_cost = exact_kmedian(space, 1)
    rhs = 2.0 * opt1_cost / (j - 1)
    tol = check_tolerance(space)
    return BoundReport(
        "general", bool(lhs <= rhs + tol), lhs=lhs, rhs=rhs,
        witness=f"r={best_r};j={j}", tolerance=tol)


# ---------------------------------------------------------------------------
# ball instrumentation


@dataclass
class BallInstrumentation:
    """Replay bookkeeping around the exact 1-median.

    ``zones[i]`` holds the points at center distance in ((i-1)r, ir] that
    ever serve a ball member during the reverse run (zone 0 is the center
    itself plus coincident points).  ``t[j]`` is the 1-based removal step
    that closes the last facility of zones 0..j, when that happens at all.
    ``m_static`` are total zone weights; ``m_operational[j]`` (defined only
    for j >= 7 when t[j-6] exists) is the total weight served by zone-j
    facilities just before step t[j-6].  Weighted sums are computed from the
    static zone weights.
    """

    center: int
    radius: float
    ball: tuple[int, ...]
    zones: dict[int, tuple[int, ...]]
    t: dict[int, int]
    m_static: dict[int, float]
    m_operational: dict[int, float]
    weighted_sum_all: float
    weighted_sum_tail: float
    never_serving_weight: float
    max_consecutive_empty: int
    h_max: int


def ball_instrumentation(space, trace: GreedyTrace, radius: float = 1.0,
                         center: int | None = None) -> BallInstrumentation:
    """Replay a full reverse trace and record which facilities ever serve
    the radius-ball around the exact 1-median."""
    if trace.direction != "reverse" or trace.k_target != 1:
        raise InputError("instrumentation needs a full reverse trace down to one facility")
    n = space.n_points
    if len(trace.steps) != n - 1:
        raise InputError("trace is truncated; expected one step per removal")
    if radius <= 0:
        raise InputError(f"radius must be positive, got {radius}")
    if center is None:
        (center,), _ = exact_kmedian(space, 1)
    center = int(center)
    w = space.weights
    dist_c = space.row(center)
    ball = np.flatnonzero(dist_c <= radius)

    def zone_of(x: int) -> int:
        d = float(dist_c[x])
        if d == 0.0:
            return 0
        return int(math.ceil(d / radius - 1e-12))

    tracker = NearestTracker(space)
    ever_serving = set(np.unique(tracker.near1[ball]).tolist())
    removal_pos = {}
    for pos, s in enumerate(trace.steps, start=1):
        removal_pos[s.point] = pos
        affected = tracker.remove(s.point)
        if tracker.open_count >= 1 and affected.size:
            aff_ball = affected[dist_c[affected] <= radius]
            if aff_ball.size:
                ever_serving.update(np.unique(tracker.near1[aff_ball]).tolist())

    zones: dict[int, list[int]] = {}
    for x in sorted(ever_serving):
        zones.setdefault(zone_of(x), []).append(x)
    zones_t = {i: tuple(members) for i, members in sorted(zones.items())}
    h_max = max(zones_t) if zones_t else 0

    m_static = {i: float(w[list(members)].sum()) for i, members in zones_t.items()}
    t: dict[int, int] = {}
    survivors = set(trace.final_set)
    prefix: set[int] = set()
    for j in range(h_max + 1):
        prefix |= set(zones_t.get(j, ()))
        if prefix and not (prefix & survivors):
            t[j] = max(removal_pos[x] for x in prefix)

    needed = {}
    for j in sorted(zones_t):
        if j >= 7 and (j - 6) in t:
            needed.setdefault(t[j - 6], []).append(j)
    m_operational: dict[int, float] = {}
    if needed:
        replay = NearestTracker(space)
        for pos, s in enumerate(trace.steps, start=1):
            if pos in needed:
                for j in needed[pos]:
                    members = np.asarray(zones_t[j])
                    served = np.isin(replay.near1, members)
                    m_operational[j] = float(w[served].sum())
            replay.remove(s.point)

    weighted_sum_all = float(sum(i * m_static[i] for i in m_static if i >= 1))
    weighted_sum_tail = float(sum(i * m_static[i] for i in m_static if i >= 10))
    never_serving = float(space.total_weight - sum(m_static.values()))
    empty_run = best_run = 0
    for i in range(1, h_max):
        if i in zones_t:
            empty_run = 0
        else:
            empty_run += 1
            best_run = max(best_run, empty_run)
    return BallInstrumentation(
        center=center, radius=float(radius),
        ball=tuple(int(b) for b in ball),
        zones=zones_t, t=t, m_static=m_static, m_operational=m_operational,
        weighted_sum_all=weighted_sum_all, weighted_sum_tail=weighted_sum_tail,
        never_serving_weight=never_serving,
        max_consecutive_empty=best_run, h_max=h_max)


# ---------------------------------------------------------------------------
# fuzz corpora


def _fuzz_space(rng: random.Random) -> WeightedMetricSpace:
    """Small random instance; every third one gets a coincident point pair
    so pseudometric handling stays under test."""
    n = rng.randint(3, 12)
    kind = "unit_square_points" if rng.random() < 0.5 else "random_graph"
    space = gen_random(n, kind, rng.getrandbits(32))
    if n >= 4 and rng.random() < 0.3:
        m = space.matrix().copy()
        src, dup = 0, n - 1
        m[dup, :] = m[src, :]
        m[:, dup] = m[:, src]
        m[dup, src] = m[src, dup] = 0.0
        m[dup, dup] = 0.0
        space = WeightedMetricSpace.from_matrix(m, pseudometric=True)
    return space


def _random_subset(rng: random.Random, n: int, lo: int = 1, hi: int | None = None):
    hi = n if hi is None else hi
    size = rng.randint(lo, hi)
    return tuple(sorted(rng.sample(range(n), size)))


def fuzz_serving_set(trials: int, seed: int) -> list[BoundReport]:
    """Seeded (space, R, M) triples through the serving-set bound."""
    rng = random.Random(seed)
    reports = []
    for trial in range(trials):
        space = _fuzz_space(rng)
        n = space.n_points
        rep = check_serving_set_bound(
            space, _random_subset(rng, n), _random_subset(rng, n))
        rep.instance = f"fuzz-{trial}"
        rep.params = f"n={n}"
        reports.append(rep)
    return reports


def fuzz_supermodularity(trials: int, seed: int) -> list[BoundReport]:
    """Seeded (Q proper subset of R) pairs through supermodularity."""
    rng = random.Random(seed)
    reports = []
    for trial in range(trials):
        space = _fuzz_space(rng)
        n = space.n_points
        R = _random_subset(rng, n, lo=2)
        q_size = rng.randint(1, len(R) - 1)
        Q = tuple(sorted(rng.sample(R, q_size)))
        rep = check_supermodularity(space, Q, R)
        rep.instance = f"fuzz-{trial}"
        rep.params = f"n={n}"
        reports.append(rep)
    return reports


def fuzz_harmonic(trials: int, seed: int) -> list[BoundReport]:
    """Seeded random instances, a random k with positive optimum each."""
    rng = random.Random(seed)
    reports = []
    for trial in range(trials):
        space = _fuzz_space(rng)
        n = space.n_points
        k = rng.randint(1, max(1, n - 1))
        rep = check_harmonic_ratio(space, k)
        rep.instance = f"fuzz-{trial}"
        reports.append(rep)
    return reports


def fuzz_step_bounds(trials: int, seed: int) -> list[BoundReport]:
    rng = random.Random(seed)
    reports = []
    for trial in range(trials):
        space = _fuzz_space(rng)
        n = space.n_points
        k = rng.randint(1, max(1, n - 1))
        chain = reverse_greedy_chain(space)
        for rep in check_step_bounds(space, truncate_chain(chain, k), k):
            rep.instance = f"fuzz-{trial}"
            reports.append(rep)
    return reports


def fuzz_min_removal(trials: int, seed: int) -> list[BoundReport]:
    rng = random.Random(seed)
    reports = []
    for trial in range(trials):
        space = _fuzz_space(rng)
        n = space.n_points
        if n < 2:
            continue
        rep = check_min_removal_bound(space, _random_subset(rng, n, lo=2))
        rep.instance = f"fuzz-{trial}"
        rep.params = f"n={n}"
        reports.append(rep)
    return reports
