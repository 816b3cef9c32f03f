"""Weighted Gram systems of monomials and the constrained L^2 minimization.

On a cylinder ``a + P_{r,s,A}`` the space of holomorphic functions is
truncated to polynomials of degree ``<= N`` in the standard coordinates
``w`` (``z = a + A w``).  The basis is ordered by total degree, so the
Gram matrix for a smaller degree is a leading block of a larger one and
the minimum norm decreases in ``N`` by construction.

Internally the monomials are taken in the rescaled variables
``u = (w_1 / r, w' / s)`` and the integrals are normalized by
``exp(phi(a))``; both keep the matrix entries O(1).  Coefficients are
reported in the ``w`` basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import _kernels
from .geometry import Cylinder, volume
from .quadrature import DEFAULT_LEVEL, unit_cylinder_rule
from .weights import Weight

__all__ = [
    "GramError",
    "IndefiniteGram",
    "IllConditionedGram",
    "OutOfScope",
    "GramSystem",
    "ExtremalFunction",
    "multi_indices",
    "basis_size",
    "assemble_gram",
    "min_extension",
    "kernel_diag",
    "norm_sq_by_degree",
    "block_conditions",
    "DEFAULT_DEGREE",
    "COND_MAX",
]

DEFAULT_DEGREE = {1: 12, 2: 8, 3: 5}
COND_MAX = 1e12


class GramError(ArithmeticError):
    pass


class IndefiniteGram(GramError):
    pass


class IllConditionedGram(GramError):
    pass


class OutOfScope(ValueError):
    """The weight is not finite on the closed cylinder."""


@lru_cache(maxsize=64)
def multi_indices(n: int, N: int) -> np.ndarray:
    """Exponents ``|alpha| <= N`` in C^n, graded then lexicographic (z1 leading)."""
    out = []

    def rec(prefix, left, k):
        if k == n - 1:
            out.append(prefix + (left,))
            return
        for a in range(left, -1, -1):
            rec(prefix + (a,), left - a, k + 1)

    for d in range(N + 1):
        rec((), d, 0)
    arr = np.array(out, dtype=np.intp).reshape(-1, n)
    arr.flags.writeable = False
    return arr


def basis_size(n: int, N: int) -> int:
    return math.comb(n + N, n)


@dataclass(frozen=True, eq=False)
class GramSystem:
    """Gram matrix of the monomial basis, stored in normalized form.

    ``G_unit`` holds ``exp(phi(a)) * <u^alpha, u^beta>``; the ``G``
    property returns the matrix in the ``w`` basis with the true weight.
    """

    n: int
    N: int
    exps: np.ndarray
    G_unit: np.ndarray
    scales: np.ndarray      # r**alpha_1 * s**|alpha'|
    log_scale: float        # -phi(a)
    volume: float
    level: int
    cond_estimate: float = field(default=float("nan"))

    @property
    def G(self) -> np.ndarray:
        S = self.scales
        return math.exp(self.log_scale) * (S[:, None] * self.G_unit * S[None, :])

    @property
    def b(self) -> np.ndarray:
        """Basis values at the center: only the constant monomial survives."""
        e = np.zeros(len(self.exps), dtype=complex)
        e[0] = 1.0
        return e

    def truncate(self, N: int) -> "GramSystem":
        k = basis_size(self.n, N)
        sub = self.G_unit[:k, :k]
        return GramSystem(self.n, N, self.exps[:k], sub, self.scales[:k], self.log_scale,
                          self.volume, self.level, _condition(sub))

    def to_json(self) -> dict:
        G = self.G
        return {
            "n": self.n,
            "N": self.N,
            "level": self.level,
            "basis": self.exps.tolist(),
            "G_re": G.real.tolist(),
            "G_im": G.imag.tolist(),
            "cond_estimate": self.cond_estimate,
        }


@dataclass(frozen=True, eq=False)
class ExtremalFunction:
    """Minimizer ``f(w) = sum_alpha c_alpha w^alpha`` with ``f(0) = 1``."""

    exps: np.ndarray
    coefficients: np.ndarray
    norm_sq: float

    def __call__(self, w: np.ndarray) -> np.ndarray:
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        return _kernels.monomial_matrix(w, self.exps) @ self.coefficients

    def at_center(self) -> complex:
        return complex(self.coefficients[0])

    def coefficient(self, alpha) -> complex:
        hit = np.flatnonzero(np.all(self.exps == np.asarray(alpha), axis=1))
        return complex(self.coefficients[hit[0]]) if hit.size else 0j


def _equilibrate(G: np.ndarray):
    d = np.real(np.diag(G))
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise IndefiniteGram("Gram matrix has a non-positive diagonal; the quadrature is too coarse")
    D = 1.0 / np.sqrt(d)
    return D, D[:, None] * G * D[None, :]


def _condition(G: np.ndarray) -> float:
    try:
        _, Gs = _equilibrate(G)
    except IndefiniteGram:
        return math.inf
    ev = np.linalg.eigvalsh(Gs)
    if ev[0] <= 0:
        return math.inf
    return float(ev[-1] / ev[0])


def _pullback(c: Cylinder, w: Weight, level: int):
    rule = unit_cylinder_rule(c.n, level)
    radii = np.array([c.r] + [c.s] * (c.n - 1))
    z = c.to_physical(rule.nodes * radii)
    psi = np.asarray(w(z), dtype=float)
    bad = ~np.isfinite(psi)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise OutOfScope(f"weight is {psi[i]} at z = {z[i].tolist()} inside the cylinder")
    return rule, radii, psi


def assemble_gram(c: Cylinder, w: Weight, N: int, level: int | None = None,
                  phi_a: float | None = None) -> GramSystem:
    """Gram system of ``w`` on ``c`` for monomials of degree ``<= N``."""
    if N < 0:
        raise ValueError("degree must be >= 0")
    level = DEFAULT_LEVEL.get(c.n, 2) if level is None else level
    if phi_a is None:
        phi_a = float(w(c.center[None, :])[0])
    if not math.isfinite(phi_a):
        raise OutOfScope("weight is not finite at the center; use the index conventions")
    rule, radii, psi = _pullback(c, w, level)
    vol_scale = float(np.prod(radii ** 2))
    omega = rule.weights * vol_scale * np.exp(-(psi - phi_a))
    exps = multi_indices(c.n, N)
    # kernels return sum omega u^a conj(u^b); the energy c^H G c of
    # f = sum c_a u^a needs the conjugate, sum omega conj(u^a) u^b
    Gu = _kernels.gram(rule.nodes, omega, exps)
    Gu = (Gu.conj() + Gu.T) / 2
    scales = np.prod(radii[None, :] ** exps, axis=1)
    if not Gu[0, 0].real > 0:
        raise IndefiniteGram("weighted volume is not positive; raise the quadrature level")
    # a singular or badly conditioned top block is not an error here: callers
    # may still use the leading blocks (see block_conditions)
    return GramSystem(c.n, N, exps, Gu, scales, -phi_a, volume(c), level, _condition(Gu))


def _solve(g: GramSystem):
    D, Gs = _equilibrate(g.G_unit)
    try:
        L = linalg.cholesky(Gs, lower=True)
    except linalg.LinAlgError as exc:
        raise IndefiniteGram("Cholesky failed: Gram matrix is indefinite; raise the quadrature level") from exc
    e0 = np.zeros(len(D), dtype=complex)
    e0[0] = 1.0
    y = linalg.solve_triangular(L, e0, lower=True)
    return D, L, y


def min_extension(g: GramSystem) -> ExtremalFunction:
    """Minimize ``c^H G c`` subject to ``f(a) = c_0 = 1``.

    The minimizer is ``G^{-1} e_0 / (G^{-1})_{00}`` with minimum
    ``1 / (G^{-1})_{00}``; both come from one Cholesky factorization of the
    diagonally equilibrated matrix.
    """
    if not g.cond_estimate <= COND_MAX:
        raise IllConditionedGram(
            f"Gram condition number {g.cond_estimate:.3e} exceeds {COND_MAX:.0e}; "
            "lower the degree or raise the quadrature level")
    D, L, y = _solve(g)
    x = D * linalg.solve_triangular(L, y, lower=True, trans="C") * D[0]
    inv00 = float(x[0].real)
    c_unit = x / x[0]
    c_unit[0] = 1.0
    norm_sq = math.exp(g.log_scale) / inv00
    return ExtremalFunction(g.exps, c_unit / g.scales, norm_sq)


def kernel_diag(g: GramSystem) -> float:
    """Truncated weighted Bergman kernel at the center, ``1 / min norm``."""
    return 1.0 / min_extension(g).norm_sq


def norm_sq_by_degree(g: GramSystem) -> np.ndarray:
    """Minimum norm for every degree ``0..g.N`` from a single factorization.

    With ``L y = e_0``, the minimum over the first ``k`` basis elements is
    ``1 / (D_0^2 sum_{i<k} |y_i|^2)``: partial sums of non-negative terms,
    so the sequence is non-increasing in floating point too.
    """
    D, _, y = _solve(g)
    ends = np.array([basis_size(g.n, d) for d in range(g.N + 1)])
    partial = np.cumsum(np.abs(y) ** 2)[ends - 1]
    return math.exp(g.log_scale) / (D[0] ** 2 * partial)


def block_conditions(g: GramSystem) -> np.ndarray:
    """Condition estimate of the Gram block for each degree ``0..g.N``."""
    return np.array([_condition(g.G_unit[:k, :k]) for k in
                     (basis_size(g.n, d) for d in range(g.N + 1))])
