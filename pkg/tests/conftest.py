import numpy as np
import pytest

from kmedian import WeightedMetricSpace, gen_star, gen_tree_lb


@pytest.fixture
def line3():
    """Three points on a line with unit gaps."""
    m = np.array([[0.0, 1.0, 2.0],
                  [1.0, 0.0, 1.0],
                  [2.0, 1.0, 0.0]])
    return WeightedMetricSpace.from_matrix(m)


@pytest.fixture(scope="session")
def tree_h2():
    return gen_tree_lb(2)


@pytest.fixture(scope="session")
def star_j3w5():
    return gen_star(3, 5)


@pytest.fixture(scope="session")
def star_j10w1000():
    return gen_star(10, 1000)
