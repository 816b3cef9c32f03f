"""Tensor quadrature on the standard cylinder ``D_r x B^{n-1}_s``.

Rules are built once on the unit cylinder (``r = s = 1``) and rescaled.
Integrals over ``a + P_{r,s,A}`` are pulled back along ``z = a + A w``;
the map has unit real Jacobian, so one rule serves every center and frame.

Refinement levels: a disc factor at level ``l`` uses ``4l`` Gauss-Legendre
radii and ``8l`` equispaced angles.  A ball factor in C^2 uses ``2l+2``
radii and polar angles and ``4l+4`` points per phase.  Balls in C^m,
``m >= 3``, fall back to a scrambled Sobol rule with rejection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import qmc

from .geometry import Cylinder, ball_volume, volume

__all__ = [
    "QuadratureRule",
    "QuadratureError",
    "Integral",
    "disc_rule",
    "ball_rule",
    "unit_cylinder_rule",
    "cylinder_rule",
    "integrate",
    "DEFAULT_LEVEL",
    "MAX_LEVEL",
]

# base level per dimension; integrals are also evaluated one level up
DEFAULT_LEVEL = {1: 5, 2: 3, 3: 2}
MAX_LEVEL = {1: 24, 2: 6, 3: 3}


class QuadratureError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray    # (M, m) complex
    weights: np.ndarray  # (M,) positive
    level: int
    kind: str            # "tensor" or "qmc"

    def __len__(self):
        return self.weights.shape[0]

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def scaled(self, radii) -> "QuadratureRule":
        """Rule on the product with per-coordinate dilations ``radii``."""
        radii = np.asarray(radii, dtype=float)
        return QuadratureRule(self.nodes * radii, self.weights * float(np.prod(radii ** 2)),
                              self.level, self.kind)


def _freeze(*arrs):
    for a in arrs:
        a.flags.writeable = False


def _gauss_radial(n_rad: int, power: int):
    """Gauss-Legendre nodes on [0, 1] carrying the Jacobian ``t**power``."""
    x, w = np.polynomial.legendre.leggauss(n_rad)
    t = (x + 1) / 2
    return t, w / 2 * t ** power


def disc_rule(r: float, n_rad: int, n_ang: int, level: int = 0) -> QuadratureRule:
    """Polar product rule on the disc of radius ``r``.

    Exact for ``z^j zbar^k`` whenever ``j + k <= 2 n_rad - 2`` and
    ``|j - k| < n_ang`` (angular moments vanish by symmetry below that).
    """
    if n_rad < 1 or n_ang < 1:
        raise ValueError("need n_rad >= 1 and n_ang >= 1")
    t, wt = _gauss_radial(n_rad, 1)
    theta = 2 * np.pi * np.arange(n_ang) / n_ang
    nodes = (r * t[:, None] * np.exp(1j * theta)[None, :]).reshape(-1, 1)
    weights = np.repeat(wt * r * r * (2 * np.pi / n_ang), n_ang)
    _freeze(nodes, weights)
    return QuadratureRule(nodes, weights, level, "tensor")


def _ball2_rule(s: float, level: int) -> QuadratureRule:
    # (t cos th e^{i p1}, t sin th e^{i p2}), volume element t^3 cos th sin th
    n_rad = n_th = 2 * level + 2
    n_ph = 4 * level + 4
    t, wt = _gauss_radial(n_rad, 3)
    x, wx = np.polynomial.legendre.leggauss(n_th)
    th = (x + 1) * np.pi / 4
    wth = wx * np.pi / 4 * np.cos(th) * np.sin(th)
    ph = 2 * np.pi * np.arange(n_ph) / n_ph
    e = np.exp(1j * ph)
    T, TH, E1, E2 = np.meshgrid(t, th, e, e, indexing="ij")
    nodes = s * np.stack([T * np.cos(TH) * E1, T * np.sin(TH) * E2], axis=-1).reshape(-1, 2)
    W = (wt[:, None] * wth[None, :]).reshape(-1) * (2 * np.pi / n_ph) ** 2 * s ** 4
    weights = np.repeat(W, n_ph * n_ph)
    _freeze(nodes, weights)
    return QuadratureRule(nodes, weights, level, "tensor")


def _qmc_ball_rule(s: float, m: int, level: int, seed: int = 0) -> QuadratureRule:
    sob = qmc.Sobol(2 * m, scramble=True, seed=seed)
    x = 2 * sob.random_base2(level + 10) - 1
    x = x[np.sum(x * x, axis=1) < 1]
    nodes = s * (x[:, 0::2] + 1j * x[:, 1::2])
    weights = np.full(len(nodes), ball_volume(s, m) / len(nodes))
    _freeze(nodes, weights)
    return QuadratureRule(nodes, weights, level, "qmc")


def ball_rule(s: float, m: int, level: int) -> QuadratureRule:
    """Rule on the ball of radius ``s`` in C^m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if level < 1:
        raise ValueError("level must be >= 1")
    if m == 1:
        return disc_rule(s, 4 * level, 8 * level, level)
    if m == 2:
        return _ball2_rule(s, level)
    return _qmc_ball_rule(s, m, level)


def _product(a: QuadratureRule, b: QuadratureRule) -> QuadratureRule:
    na, nb = len(a), len(b)
    nodes = np.concatenate([np.repeat(a.nodes, nb, axis=0), np.tile(b.nodes, (na, 1))], axis=1)
    weights = np.outer(a.weights, b.weights).reshape(-1)
    kind = "qmc" if "qmc" in (a.kind, b.kind) else "tensor"
    _freeze(nodes, weights)
    return QuadratureRule(nodes, weights, a.level, kind)


@lru_cache(maxsize=16)
def unit_cylinder_rule(n: int, level: int) -> QuadratureRule:
    """Rule on ``D_1 x B^{n-1}_1`` (cached)."""
    disc = ball_rule(1.0, 1, level)
    if n == 1:
        return disc
    return _product(disc, ball_rule(1.0, n - 1, level))


def cylinder_rule(n: int, r: float, s: float, level: int) -> QuadratureRule:
    """Rule on the standard cylinder ``D_r x B^{n-1}_s``."""
    return unit_cylinder_rule(n, level).scaled([r] + [s] * (n - 1))


class Integral(NamedTuple):
    value: complex
    err: float


def _weighted_sum(f: Callable, c: Cylinder, rule: QuadratureRule) -> complex:
    z = c.to_physical(rule.nodes)
    vals = np.asarray(f(z))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise QuadratureError(f"integrand is {vals[i]} at node {i} (z = {z[i].tolist()})")
    return complex(np.sum(rule.weights * vals))


def integrate(c: Cylinder, f: Callable[[np.ndarray], np.ndarray], rule: QuadratureRule | None = None,
              level: int | None = None) -> Integral:
    """Integral of ``f`` over ``a + P_{r,s,A}``.

    ``f`` receives physical points of shape ``(M, n)``.  The error estimate
    is the difference from the same rule one level finer.
    """
    if rule is None:
        level = DEFAULT_LEVEL.get(c.n, 2) if level is None else level
        rule = cylinder_rule(c.n, c.r, c.s, level)
    fine = cylinder_rule(c.n, c.r, c.s, rule.level + 1)
    coarse_val = _weighted_sum(f, c, rule)
    fine_val = _weighted_sum(f, c, fine)
    return Integral(coarse_val, abs(fine_val - coarse_val))


def standard_volume(n: int, r: float, s: float) -> float:
    return volume(Cylinder(np.zeros(n), r, s))
