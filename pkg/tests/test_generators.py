import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmedian import (BudgetExceededError, InputError, WeightedMetricSpace,
                     epsilon_perturb, gen_k_copies, gen_random, gen_star,
                     gen_tree_lb, graph_to_metric, tree_lb_edges, verify_metric)
from kmedian.generators import TreeStructure, tree_instance_size
from kmedian.io import dumps_instance
from oracles import brute_cost, brute_exact, floyd_warshall


# ---------------------------------------------------------------------------
# layered tree


def test_tree_h1_degenerate():
    t = gen_tree_lb(1)
    assert t.n_points == 2
    assert list(t.weights) == [1.0, 1.0]
    assert t.distance(0, 1) == 1.0
    assert t.labels[0] == "mu" and t.labels[1] == "rho"


def test_tree_h2_shape(tree_h2):
    assert tree_h2.n_points == 29
    assert tree_h2.total_weight == 36.0
    leaves = [i for i in range(29) if tree_h2.weights[i] == 1.0 and i != 0]
    assert len(leaves) == 27
    assert tree_h2.weights[28] == 8.0


def test_tree_h3_shape():
    t3 = gen_tree_lb(3)
    assert t3.n_points == 1794
    assert t3.total_weight == 2457.0  # 1728 + 512 + 216 + 1


@pytest.mark.parametrize("h", [1, 2, 3])
def test_tree_level_counts_and_weights_closed_form(h):
    """Counts ((h+1)!/(i+1)!)^3 and weights (h+1)!^3/(i+1)^3, from the
    explicit construction."""
    t = gen_tree_lb(h)
    tree = TreeStructure(h)
    fac = math.factorial(h + 1)
    for i in range(1, h + 1):
        ids = list(tree.level_ids(i))
        assert len(ids) == (fac // math.factorial(i + 1)) ** 3
        level_weight = float(t.weights[ids].sum())
        assert level_weight == fac ** 3 / (i + 1) ** 3


@pytest.mark.parametrize("h", [2, 3])
def test_tree_subtree_weight_strictly_below_parent_weight(h):
    """w(T_x) < parent-level weight at every node, summed explicitly."""
    tree = TreeStructure(h)
    t = gen_tree_lb(h)
    for j in range(1, h + 1):
        for x in tree.level_ids(j):
            # explicit walk: subtree = nodes whose leaf interval nests in x's
            lo = tree.leaf_lo[x]
            hi = lo + tree.leaves_per[j]
            members = [y for y in range(1, tree.n)
                       if tree.level[y] <= j and lo <= tree.leaf_lo[y] < hi]
            subtree_weight = float(t.weights[members].sum())
            assert subtree_weight == tree.subtree_weight(x)
            assert subtree_weight < tree.node_weight(j + 1)


@pytest.mark.parametrize("h", [1, 2, 3])
def test_tree_implicit_oracle_matches_graph(h):
    t = gen_tree_lb(h)
    g = graph_to_metric(tree_lb_edges(h), n=t.n_points)
    assert np.array_equal(t.matrix(), g.matrix())


def test_tree_tie_priority_orders_mu_then_levels(tree_h2):
    pri = tree_h2.tie_priority
    assert pri[0] == tree_h2.id_of_label("mu")
    assert pri[-1] == tree_h2.id_of_label("rho")
    assert len(pri) == tree_h2.n_points


def test_tree_refuses_large_h():
    with pytest.raises(InputError, match="48,411,218"):
        gen_tree_lb(5)


def test_tree_h4_supported_through_implicit_oracle():
    t4 = gen_tree_lb(4)
    assert t4.n_points == tree_instance_size(4) == 224_127
    assert t4.total_weight == 320_825.0
    tree = TreeStructure(4)
    assert t4.distance(0, t4.n_points - 1) == 4.0
    assert t4.distance(1, t4.n_points - 1) == 3.0
    l2 = tree.level_ids(2)
    assert t4.distance(l2[0], l2[1]) == 2.0
    with pytest.raises(BudgetExceededError):
        t4.matrix()  # far above the dense limit


# ---------------------------------------------------------------------------
# star


def test_star_single_arm():
    s = gen_star(1, 1)
    assert s.n_points == 3
    assert s.distance(0, 1) == 1.0
    assert s.distance(1, 2) == 1.0
    assert s.distance(0, 2) == 2.0


def test_star_center_cost_formula():
    for j, w in [(1, 1), (2, 7), (3, 5), (6, 30)]:
        s = gen_star(j, w)
        assert s.cost([0]) == j * (w + 2)


def test_star_all_y_cost(star_j10w1000):
    ys = list(range(11, 21))
    assert star_j10w1000.cost(ys) == 10_002.0  # j*w for the arms + 2 for the hub


def test_star_weights_and_labels(star_j3w5):
    assert star_j3w5.weights[1] == 5.0
    assert star_j3w5.labels[4] == "y1"


def test_star_param_validation():
    with pytest.raises(InputError):
        gen_star(0, 5)
    with pytest.raises(InputError):
        gen_star(3, 0.5)


# ---------------------------------------------------------------------------
# k copies


def test_k_copies_identity():
    s = gen_star(2, 3)
    assert gen_k_copies(s, 1) is s


def test_k_copies_preserves_blocks_and_separation(tree_h2):
    two = gen_k_copies(tree_h2, 2)
    n = tree_h2.n_points
    m = two.matrix()
    assert np.array_equal(m[:n, :n], tree_h2.matrix())
    assert np.array_equal(m[n:, n:], tree_h2.matrix())
    sep = 4.0 * tree_h2.diameter() * tree_h2.total_weight
    assert np.all(m[:n, n:] == sep)
    assert verify_metric(two).holds
    assert two.labels[n] == "mu@1"


def test_k_copies_exact_decomposes_star(star_j3w5):
    two = gen_k_copies(star_j3w5, 2)
    members, cost = brute_exact(two.matrix(), two.weights, 2)
    assert cost == 42.0
    assert members == (0, 7)  # the hub of each copy


def test_k_copies_exact_decomposes_tree(tree_h2):
    two = gen_k_copies(tree_h2, 2)
    members, cost = brute_exact(two.matrix(), two.weights, 2)
    assert cost == 58.0
    assert members == (28, 57)  # the root of each copy


def test_k_copies_rejects_small_separation(star_j3w5):
    with pytest.raises(InputError, match="separation"):
        gen_k_copies(star_j3w5, 2, separation=1.0)


def test_k_copies_budget(tree_h2):
    with pytest.raises(BudgetExceededError):
        gen_k_copies(tree_h2, 300)


# ---------------------------------------------------------------------------
# random instances


def test_random_single_point():
    s = gen_random(1, "unit_square_points", 3)
    assert s.n_points == 1
    assert s.cost([0]) == 0.0


def test_random_zero_points_rejected():
    with pytest.raises(InputError):
        gen_random(0, "unit_square_points", 1)


def test_random_unknown_kind_rejected():
    with pytest.raises(InputError):
        gen_random(5, "grid", 1)


@pytest.mark.parametrize("kind", ["unit_square_points", "random_graph"])
def test_random_seed_reproducible_bytes(kind):
    a = json.dumps(dumps_instance(gen_random(12, kind, 99)))
    b = json.dumps(dumps_instance(gen_random(12, kind, 99)))
    assert a == b
    c = json.dumps(dumps_instance(gen_random(12, kind, 100)))
    assert a != c


def test_random_graph_is_integral():
    assert gen_random(9, "random_graph", 4).is_integral
    assert not gen_random(9, "unit_square_points", 4).is_integral


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 10**6),
       kind=st.sampled_from(["unit_square_points", "random_graph"]))
def test_random_instances_are_metric(n, seed, kind):
    assert verify_metric(gen_random(n, kind, seed)).holds


def test_random_graph_matches_floyd_warshall():
    s = gen_random(11, "random_graph", 17)
    edges = s.source["edges"]
    assert np.array_equal(s.matrix(), floyd_warshall(11, edges))


# ---------------------------------------------------------------------------
# epsilon floor


def test_epsilon_noop_on_positive_distances(tree_h2):
    lifted = epsilon_perturb(tree_h2, 0.01)
    assert np.array_equal(lifted.matrix(), tree_h2.matrix())


def test_epsilon_lifts_coincident_points():
    m = np.array([[0.0, 0.0, 2.0],
                  [0.0, 0.0, 2.0],
                  [2.0, 2.0, 0.0]])
    space = WeightedMetricSpace.from_matrix(m, pseudometric=True)
    lifted = epsilon_perturb(space, 0.01)
    assert lifted.distance(0, 1) == 0.01
    assert not lifted.pseudometric
    assert verify_metric(lifted).holds


def test_epsilon_cost_shift_bounded():
    m = np.array([[0.0, 0.0, 2.0],
                  [0.0, 0.0, 2.0],
                  [2.0, 2.0, 0.0]])
    space = WeightedMetricSpace.from_matrix(m, pseudometric=True)
    eps = 0.25
    lifted = epsilon_perturb(space, eps)
    for F in ([0], [2], [0, 2]):
        assert abs(lifted.cost(F) - space.cost(F)) <= eps * space.total_weight


def test_epsilon_too_large_names_limit(tree_h2):
    with pytest.raises(InputError, match="1.0"):
        epsilon_perturb(tree_h2, 0.5)


def test_epsilon_requires_positive():
    with pytest.raises(InputError):
        epsilon_perturb(gen_star(2, 2), 0.0)


# ---------------------------------------------------------------------------
# cross-cutting: every generator output passes verification


@pytest.mark.parametrize("space_fn", [
    lambda: gen_tree_lb(1),
    lambda: gen_tree_lb(2),
    lambda: gen_star(3, 5),
    lambda: gen_star(10, 1000),
    lambda: gen_k_copies(gen_star(2, 4), 3),
    lambda: gen_random(15, "unit_square_points", 8),
    lambda: gen_random(15, "random_graph", 8),
])
def test_generator_outputs_are_metric(space_fn):
    assert verify_metric(space_fn()).holds
