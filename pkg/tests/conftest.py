import numpy as np
import pytest

from l2index.geometry import Domain


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def unit_ball2():
    return Domain.ball(np.zeros(2), 1.0)


@pytest.fixture
def unit_disc():
    return Domain.ball(np.zeros(1), 1.0)
