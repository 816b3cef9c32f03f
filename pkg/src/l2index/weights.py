"""Weight functions on C^n: the built-in catalog and expression weights."""
from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as ex

__all__ = [
    "TRUTH_TAGS",
    "Weight",
    "WeightError",
    "from_expression",
    "radial_weight",
    "catalog",
    "catalog_weight",
    "resolve",
    "eval_weight",
]

TRUTH_TAGS = ("pluriharmonic", "psh_strict", "psh", "superharmonic_strict", "mixed", "unknown")

IMAG_TOL = 1e-12


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class Weight:
    """A real weight ``phi`` on C^n, evaluated on arrays of shape ``(..., n)``.

    ``func`` must be picklable (module-level function, partial, or an
    expression tree evaluator) so sweeps can ship weights to workers.
    """

    name: str
    source: str
    n: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    smooth: bool = True
    truth: str = "unknown"
    min_dim: int = 1
    warnings: tuple = ()

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.n:
            raise WeightError(f"weight {self.name!r} lives on C^{self.n}, got points in C^{z.shape[-1]}")
        return self.func(z)

    def shifted(self, c: float) -> "Weight":
        return Weight(f"{self.name}+{c!r}", f"({self.source}) + {c!r}", self.n,
                      functools.partial(_shift, self.func, float(c)), self.smooth, self.truth,
                      self.min_dim, self.warnings)

    def composed(self, U: np.ndarray) -> "Weight":
        """The weight ``z -> phi(U z)``."""
        U = np.array(U, dtype=complex)
        return Weight(f"{self.name}@U", f"({self.source}) o U", self.n,
                      functools.partial(_compose, self.func, U), self.smooth, self.truth,
                      self.min_dim, self.warnings)


def eval_weight(w: Weight, z) -> float:
    """Pointwise value of ``w`` at a single point ``z`` in C^n."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (w.n,):
        raise WeightError(f"expected a point in C^{w.n}, got shape {z.shape}")
    return float(w(z[None, :])[0])


def _shift(f, c, z):
    return f(z) + c


def _compose(f, U, z):
    return f(z @ U.T)


# -- expression weights ------------------------------------------------------


class _ExprEval:
    """Picklable evaluator for a parsed expression; returns the real part.

    Raises if the imaginary part is not negligible: a weight is real.
    """

    def __init__(self, tree: ex.Node, source: str):
        self.tree = tree
        self.source = source

    def __call__(self, z):
        v = ex.evaluate(self.tree, z)
        finite = np.isfinite(v)
        scale = np.maximum(1.0, np.abs(np.where(finite, v.real, 0.0)))
        bad = finite & (np.abs(v.imag) > IMAG_TOL * scale)
        if np.any(bad):
            raise WeightError(f"weight {self.source!r} is not real-valued "
                              f"(|Im| = {np.max(np.abs(v.imag[bad])):.3e})")
        return np.ascontiguousarray(v.real)


def from_expression(source: str, n: int | None = None, seed: int = 0) -> Weight:
    """Parse ``source`` into a Weight on C^n and validate it.

    Validation evaluates at random points of the unit polydisc: the value
    must be real, and nearby pairs must have nearby values (a spot check
    only; continuity is not provable from the tree).
    """
    tree = ex.parse(source, n)
    n = n if n is not None else max(1, ex.max_var_index(tree))
    func = _ExprEval(tree, source)
    notes = []
    if ex.uses(tree, "log") or ex.uses(tree, "/") or ex.uses(tree, "^-"):
        notes.append("expression uses log or division; continuity on the domain is the user's responsibility")

    rng = np.random.default_rng(seed)
    pts = (rng.random((64, n)) * 2 - 1) + 1j * (rng.random((64, n)) * 2 - 1)
    vals = func(pts)  # raises if not real
    delta = 1e-7 * (rng.standard_normal((64, n)) + 1j * rng.standard_normal((64, n)))
    jump = np.abs(func(pts + delta) - vals)
    ok = np.isfinite(vals)
    if np.any(jump[ok] > 1e-3 * np.maximum(1.0, np.abs(vals[ok]))):
        notes.append("continuity spot check failed at some sample pairs")
    if not np.all(ok):
        notes.append("weight is not finite at some validation points")
    for note in notes:
        warnings.warn(f"{source!r}: {note}", stacklevel=2)
    return Weight(ex.to_source(tree), source, n, func, smooth=not notes, warnings=tuple(notes))


# -- radial weights ------------------------------------------------------------


def _radial(profile, center, z):
    return profile(np.linalg.norm(z - center, axis=-1))


def radial_weight(profile: Callable[[np.ndarray], np.ndarray], n: int = 1, center=0.0,
                  name: str = "radial", truth: str = "unknown") -> Weight:
    """The weight ``phi(z) = profile(|z - center|)``."""
    center = np.broadcast_to(np.asarray(center, dtype=complex), (n,)).copy()
    return Weight(name, name, n, functools.partial(_radial, profile, center), truth=truth)


# -- catalog -------------------------------------------------------------------


def _zero(z):
    return np.zeros(z.shape[:-1])


def _const(c, z):
    return np.full(z.shape[:-1], c)


def _abs2(z):
    return np.sum(z.real ** 2 + z.imag ** 2, axis=-1)


def _plh_linear(z):
    return 2 * z[..., 0].real


def _plh_quad(z):
    return 2 * (z[..., 0] ** 2).real


def _plh_mixed(z):
    return 2 * (z[..., 0] + 1j * z[..., 1]).real


def _gauss(z):
    return _abs2(z)


def _neg_gauss(z):
    return -_abs2(z)


def _saddle(z):
    return np.abs(z[..., 0]) ** 2 - np.abs(z[..., 1]) ** 2


def _gauss_linear(eps, z):
    return eps * _abs2(z) + 2 * z[..., 0].real


def _max_linear(z):
    x = z[..., 0].real
    return np.maximum(2 * x, 4 * x)


CONST_VALUE = 1.5
GAUSS_LINEAR_EPS = 0.25

# name: (func, source, truth, smooth, min_dim)
_CATALOG = {
    "zero": (_zero, "0", "pluriharmonic", True, 1),
    "const": (functools.partial(_const, CONST_VALUE), repr(CONST_VALUE), "pluriharmonic", True, 1),
    "plh_linear": (_plh_linear, "2*re(z1)", "pluriharmonic", True, 1),
    "plh_quad": (_plh_quad, "2*re(z1^2)", "pluriharmonic", True, 1),
    "plh_mixed": (_plh_mixed, "2*re(z1 + 1.0i*z2)", "pluriharmonic", True, 2),
    "gauss": (_gauss, "|z|^2", "psh_strict", True, 1),
    "neg_gauss": (_neg_gauss, "-|z|^2", "superharmonic_strict", True, 1),
    "saddle": (_saddle, "abs2(z1) - abs2(z2)", "mixed", True, 2),
    "gauss_linear": (functools.partial(_gauss_linear, GAUSS_LINEAR_EPS),
                     f"{GAUSS_LINEAR_EPS!r}*|z|^2 + 2*re(z1)", "psh_strict", True, 1),
    "max_linear": (_max_linear, "max(2*re(z1), 2*re(2*z1))", "psh", False, 1),
}


def catalog_weight(name: str, n: int = 1) -> Weight:
    try:
        func, source, truth, smooth, min_dim = _CATALOG[name]
    except KeyError:
        raise WeightError(f"unknown catalog weight {name!r}; known: {', '.join(_CATALOG)}") from None
    if n < min_dim:
        raise WeightError(f"catalog weight {name!r} needs n >= {min_dim}")
    return Weight(name, f"catalog:{name}", n, func, smooth, truth, min_dim)


def catalog(n: int = 2) -> list[Weight]:
    """Every catalog weight defined on C^n."""
    return [catalog_weight(k, n) for k, v in _CATALOG.items() if v[4] <= n]


def catalog_names() -> list[str]:
    return list(_CATALOG)


def resolve(spec: str, n: int | None = None) -> Weight:
    """``catalog:<name>`` or an expression."""
    if spec.startswith("catalog:"):
        name = spec.split(":", 1)[1]
        if n is None:
            n = _CATALOG.get(name, (None,) * 5)[4] or 1
        return catalog_weight(name, n)
    return from_expression(spec, n)


def catalog_source(name: str) -> str:
    """Human-readable formula of a catalog entry."""
    return _CATALOG[name][1]
