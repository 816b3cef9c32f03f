import math

import numpy as np
import pytest

from l2index.geometry import Cylinder, haar_unitary, volume
from l2index.quadrature import (DEFAULT_LEVEL, QuadratureError, ball_rule, cylinder_rule,
                                disc_rule, integrate)


def _abs2(z):
    return np.sum(np.abs(z) ** 2, axis=-1)


def test_disc_moments():
    # int_D |z|^2 = pi/2 ; int_D |z|^{2k} = pi/(k+1)
    rule = disc_rule(1.0, 8, 16)
    z = rule.nodes[:, 0]
    for k in range(6):
        assert np.sum(rule.weights * np.abs(z) ** (2 * k)) == pytest.approx(math.pi / (k + 1), rel=1e-13)
    # z^j zbar^k integrates to 0 for j != k
    assert abs(np.sum(rule.weights * z ** 3 * np.conj(z))) < 1e-14


def test_cylinder_abs2_n2():
    # int over D x D of |z|^2 = 2 * (pi/2) * pi
    c = Cylinder([0, 0], 1.0, 1.0)
    assert integrate(c, _abs2).value.real == pytest.approx(math.pi ** 2, rel=1e-12)
    c1 = Cylinder([0], 1.0)
    assert integrate(c1, _abs2).value.real == pytest.approx(math.pi / 2, rel=1e-13)


def test_ball_c2_moments():
    rule = ball_rule(1.0, 2, 3)
    # |B^2| = pi^2/2, int |w|^2 = pi^2/3, int |w1|^2 = pi^2/6
    assert rule.total == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    assert np.sum(rule.weights * _abs2(rule.nodes)) == pytest.approx(math.pi ** 2 / 3, rel=1e-12)
    assert np.sum(rule.weights * np.abs(rule.nodes[:, 0]) ** 2) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)


def test_qmc_ball():
    # int_{B^3} |w|^2 = pi^3 / 8; rejection QMC converges slowly
    for level, rel in ((2, 3e-2), (6, 2e-3), (8, 2e-3)):
        rule = ball_rule(1.0, 3, level)
        assert rule.kind == "qmc"
        assert np.all(_abs2(rule.nodes) < 1)
        assert np.sum(rule.weights * _abs2(rule.nodes)) == pytest.approx(math.pi ** 3 / 8, rel=rel)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_weights_positive_and_sum_to_volume(n):
    rule = cylinder_rule(n, 0.7, 0.4, 3)
    assert np.all(rule.weights > 0)
    assert rule.total == pytest.approx(volume(Cylinder(np.zeros(n), 0.7, 0.4)), rel=1e-6)


def test_unitary_invariance(rng):
    # a unitarily invariant integrand does not see the frame
    f = lambda z: np.exp(-_abs2(z))
    base = Cylinder([0, 0], 0.8, 0.5)
    ref = integrate(base, f).value
    for _ in range(3):
        c = base.with_frame(haar_unitary(2, rng))
        assert integrate(c, f).value == pytest.approx(ref, rel=1e-13)


def test_translation_covariance():
    a = np.array([0.3 - 0.1j, 0.2j])
    f = lambda z: np.exp(-_abs2(z)) * np.cos(z[:, 0].real)
    shifted = integrate(Cylinder(a, 0.5, 0.4), f).value
    moved = integrate(Cylinder([0, 0], 0.5, 0.4), lambda z: f(z + a)).value
    assert shifted == pytest.approx(moved, rel=1e-14)


def test_convergence_and_error_estimate():
    c = Cylinder([0.1, 0.2], 1.0, 0.7)
    f = lambda z: np.exp(-3 * _abs2(z) + 2 * z[:, 0].real)
    errs = [integrate(c, f, level=l).err for l in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 1e-12


def test_exact_value_against_closed_form():
    # int_D e^{-|z|^2} = pi (1 - e^{-1})
    got = integrate(Cylinder([0], 1.0), lambda z: np.exp(-_abs2(z)), level=DEFAULT_LEVEL[1])
    assert got.value.real == pytest.approx(math.pi * (1 - math.exp(-1)), rel=1e-13)


def test_nonfinite_integrand_names_node():
    with pytest.raises(QuadratureError, match="node"), np.errstate(divide="ignore"):
        integrate(Cylinder([0], 1.0), lambda z: 1 / (z[:, 0].real - z[0, 0].real))


def test_bad_rule_parameters():
    with pytest.raises(ValueError):
        disc_rule(1.0, 0, 4)
    with pytest.raises(ValueError):
        ball_rule(1.0, 2, 0)
