import numpy as np
import pytest

from becaus import LtiSystem, generate
from becaus.relations import Relation


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def example2_system():
    return LtiSystem([[1.0, -0.5], [0.5, 1.0]], [[-0.5], [2.0]],
                     [[2.0, -2.0]], [[0.0]])


@pytest.fixture
def example3_system():
    return LtiSystem([[1.5, -0.5], [0.5, 0.8]], [[-0.5, 1.5], [2.0, -2.0]],
                     [[2.0, -2.0], [1.0, -1.0]], [[2.0, 2.0], [1.0, 1.0]])


@pytest.fixture
def example4_system():
    return LtiSystem([[0.5, -0.5], [0.5, 0.5]], [[-0.5, 3.0], [-2.0, 1.0]],
                     [[1.0, -2.0], [0.0, 0.0], [2.0, 0.5], [0.0, 0.0]],
                     [[1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])


@pytest.fixture
def example2_dataset(example2_system):
    rng = np.random.default_rng(0)
    return generate(Relation.THETA_TO_PSI, 50, rng, sys=example2_system,
                    x0=[1.0, 0.0], driver_dist=(0.0, 1.0))
