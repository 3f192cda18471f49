import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from kmedian import (ExactKMedian, ForwardGreedyKMedian, ReverseGreedyKMedian,
                     exact_kmedian, gen_random, reverse_greedy)


@pytest.fixture
def blobs():
    rng = np.random.default_rng(0)
    a = rng.normal([0, 0], 0.1, (8, 2))
    b = rng.normal([5, 5], 0.1, (7, 2))
    return np.vstack([a, b])


def test_reverse_fit_separates_blobs(blobs):
    est = ReverseGreedyKMedian(n_clusters=2).fit(blobs)
    labels = est.labels_
    assert len(set(labels[:8])) == 1
    assert len(set(labels[8:])) == 1
    assert labels[0] != labels[-1]
    assert est.medians_.shape == (2,)
    assert est.cost_ > 0


def test_fit_predict_consistent(blobs):
    est = ReverseGreedyKMedian(n_clusters=3)
    assert np.array_equal(est.fit_predict(blobs), est.labels_)
    assert np.array_equal(est.predict(blobs), est.labels_)


def test_transform_shape_and_content(blobs):
    est = ReverseGreedyKMedian(n_clusters=2).fit(blobs)
    dist = est.transform(blobs)
    assert dist.shape == (15, 2)
    assert np.all(dist >= 0)
    assert np.allclose(dist.min(axis=1)[est.labels_ == 0],
                       dist[est.labels_ == 0, 0])


def test_precomputed_matches_euclidean(blobs):
    from scipy.spatial.distance import cdist

    d = cdist(blobs, blobs)
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    a = ReverseGreedyKMedian(n_clusters=2).fit(blobs)
    b = ReverseGreedyKMedian(n_clusters=2, metric="precomputed").fit(d)
    assert np.array_equal(a.medians_, b.medians_)
    assert a.cost_ == pytest.approx(b.cost_, rel=1e-12)


def test_precomputed_predict_uses_columns(blobs):
    from scipy.spatial.distance import cdist

    d = cdist(blobs, blobs)
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    est = ReverseGreedyKMedian(n_clusters=2, metric="precomputed").fit(d)
    new = cdist(blobs[:3], blobs)
    assert np.array_equal(est.predict(new), est.labels_[:3])


def test_sample_weight_moves_medians():
    X = np.array([[0.0], [1.0], [2.0]])
    plain = ExactKMedian(n_clusters=1).fit(X)
    heavy = ExactKMedian(n_clusters=1).fit(X, sample_weight=[1, 1, 10])
    assert plain.medians_[0] == 1
    assert heavy.medians_[0] == 2


def test_matches_functional_api(blobs):
    est = ReverseGreedyKMedian(n_clusters=4).fit(blobs)
    space = est._space(blobs, None)
    trace = reverse_greedy(space, 4)
    assert tuple(est.medians_) == trace.final_set
    assert est.cost_ == trace.final_cost

    exact = ExactKMedian(n_clusters=2).fit(blobs)
    members, cost = exact_kmedian(space, 2)
    assert tuple(exact.medians_) == members
    assert exact.cost_ == cost


def test_forward_estimator(blobs):
    est = ForwardGreedyKMedian(n_clusters=2).fit(blobs)
    assert est.trace_.direction == "forward"
    assert len(est.trace_.steps) == 2


def test_exact_estimator_budget():
    from kmedian import BudgetExceededError

    X = np.random.default_rng(1).random((30, 2))
    with pytest.raises(BudgetExceededError):
        ExactKMedian(n_clusters=10, budget=100).fit(X)


def test_clone_and_params_roundtrip():
    est = ReverseGreedyKMedian(n_clusters=5, tie="random", random_state=3,
                               algorithm="reference")
    p = est.get_params()
    assert p["n_clusters"] == 5 and p["algorithm"] == "reference"
    cl = clone(est)
    assert cl.get_params() == p
    cl.set_params(n_clusters=2)
    assert cl.n_clusters == 2


def test_random_state_reproducible():
    X = np.random.default_rng(5).integers(0, 4, (12, 2)).astype(float)
    a = ReverseGreedyKMedian(n_clusters=3, tie="random", random_state=7).fit(X)
    b = ReverseGreedyKMedian(n_clusters=3, tie="random", random_state=7).fit(X)
    assert np.array_equal(a.medians_, b.medians_)


def test_algorithm_reference_agrees(blobs):
    fast = ReverseGreedyKMedian(n_clusters=3).fit(blobs)
    ref = ReverseGreedyKMedian(n_clusters=3, algorithm="reference").fit(blobs)
    assert np.array_equal(fast.medians_, ref.medians_)
    assert fast.trace_ == ref.trace_


def test_predict_before_fit_raises(blobs):
    with pytest.raises(NotFittedError):
        ReverseGreedyKMedian(n_clusters=2).predict(blobs)


def test_invalid_params(blobs):
    with pytest.raises(ValueError):
        ReverseGreedyKMedian(n_clusters=0).fit(blobs)
    with pytest.raises(ValueError):
        ReverseGreedyKMedian(n_clusters=2, tie="priority").fit(blobs)
    with pytest.raises(ValueError):
        ReverseGreedyKMedian(n_clusters=2, tie="alphabetical").fit(blobs)


def test_pipeline_compose(blobs):
    from sklearn.preprocessing import StandardScaler

    pipe = make_pipeline(StandardScaler(), ReverseGreedyKMedian(n_clusters=2))
    labels = pipe.fit_predict(blobs)
    assert len(set(labels)) == 2


def test_duplicate_rows_allowed():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [3.0, 3.0]])
    est = ReverseGreedyKMedian(n_clusters=2).fit(X)
    assert est.cost_ == 0.0
