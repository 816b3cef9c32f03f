import math

import numpy as np
import pytest

from l2index.geometry import Cylinder, haar_unitary
from l2index.index import l2_index
from l2index.oracle import (RADIAL_PROFILES, OracleError, mc_integral, pluriharmonic_extremal,
                            radial_index)
from l2index.quadrature import integrate
from l2index.weights import catalog_weight, radial_weight


def test_radial_closed_forms():
    assert radial_index(RADIAL_PROFILES["zero"], 0.3) == pytest.approx(1.0, abs=1e-14)
    assert radial_index(RADIAL_PROFILES["t2"], 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-14)
    assert radial_index(RADIAL_PROFILES["neg_t2"], 1.0) == pytest.approx(math.e - 1, abs=1e-13)
    # r = 0.5: 2/r^2 * (1 - e^{-r^2}) / 2
    assert radial_index(RADIAL_PROFILES["t2"], 0.5) == pytest.approx(4 * (1 - math.exp(-0.25)), abs=1e-14)


@pytest.mark.parametrize("key", sorted(RADIAL_PROFILES))
@pytest.mark.parametrize("r", [0.5, 1.0])
def test_index_matches_radial_oracle(key, r):
    w = radial_weight(np.vectorize(RADIAL_PROFILES[key]), 1)
    assert l2_index(Cylinder([0], r), w).L == pytest.approx(radial_index(RADIAL_PROFILES[key], r), abs=1e-6)


def test_mc_agrees_with_quadrature(rng):
    c = Cylinder([0.2, 0.1j], 0.6, 0.5, haar_unitary(2, rng))
    f = lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=-1) + z[:, 1].real)
    q = integrate(c, f).value
    mc = mc_integral(c, f, 400_000, seed=7)
    assert abs(mc.value - q) <= mc.half_width
    assert mc.accepted == 400_000


def test_mc_reproducible_and_seed_sensitive():
    c = Cylinder([0], 1.0)
    f = lambda z: np.abs(z[:, 0]) ** 2
    a = mc_integral(c, f, 50_000, seed=1)
    assert a == mc_integral(c, f, 50_000, seed=1)
    assert a.value != mc_integral(c, f, 50_000, seed=2).value


def test_mc_low_efficiency_refused():
    # a thin ball in high dimension barely fills its bounding box
    with pytest.raises(OracleError, match="efficiency"):
        mc_integral(Cylinder(np.zeros(7), 1.0, 1.0), lambda z: np.ones(len(z)), 1000)


def test_pluriharmonic_extremal_energy():
    # phi = 2 Re z1: |e^{z1 - a}|^2 e^{-phi} = e^{-phi(a)} pointwise, energy = |P| e^{-phi(a)}
    c = Cylinder([0.3 - 0.2j], 0.5)
    f = pluriharmonic_extremal("z1", c)
    w = catalog_weight("plh_linear", 1)
    val = integrate(c, lambda z: np.abs(f(z)) ** 2 * np.exp(-w(z))).value.real
    assert val == pytest.approx(math.pi * 0.25 * math.exp(-0.6), rel=1e-12)
    assert f(c.center[None, :])[0] == pytest.approx(1.0)
