from __future__ import annotations

import numpy as np
import pytest

from toeplitz_tuples.tuples import validate


def projections_pair():
    """T_1 = diag(1, 1, 0), T_2 = diag(0, 1, 1)."""
    return validate([np.diag([1.0, 1.0, 0.0]), np.diag([0.0, 1.0, 1.0])])


def scaled_pair(a: float = 0.5):
    """T_1 = diag(a, a, 0), T_2 = diag(0, 1, 1)."""
    return validate([np.diag([a, a, 0.0]), np.diag([0.0, 1.0, 1.0])])


@pytest.fixture
def F1():
    return projections_pair()


@pytest.fixture
def F2():
    return scaled_pair(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
