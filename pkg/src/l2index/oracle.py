"""Reference computations that share no numerical path with the main stack.

* ``radial_index``: for ``phi(z) = p(|z|)`` on a disc centered at 0 the
  minimizer is the constant 1 (angular orthogonality), so the index is a
  one-dimensional integral, done here by adaptive quadrature.
* ``mc_integral``: plain Monte Carlo over a cylinder, on its own random
  stream (Philox, not the PCG64 stream used for sampling cylinders).
* ``pluriharmonic_extremal``: for ``phi = 2 Re h`` the function
  ``exp(h - h(a))`` attains equality pointwise.
"""
from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate as sci_integrate
from scipy.stats import norm as normal_dist

from . import expr as ex
from .geometry import Cylinder

__all__ = ["radial_index", "MCResult", "mc_integral", "pluriharmonic_extremal", "RADIAL_PROFILES",
           "OracleError"]


class OracleError(RuntimeError):
    pass


RADIAL_PROFILES: dict[str, Callable[[float], float]] = {
    "zero": lambda t: 0.0,
    "t2": lambda t: t * t,
    "neg_t2": lambda t: -t * t,
    "t4": lambda t: t ** 4,
    "t2sin": lambda t: t * t + 0.1 * math.sin(5 * t),
}


def radial_index(profile: Callable[[float], float], r: float) -> float:
    """Index of ``phi(z) = profile(|z|)`` on the disc of radius ``r`` about 0 in C."""
    p0 = profile(0.0)
    val, err = sci_integrate.quad(lambda t: t * math.exp(-(profile(t) - p0)), 0.0, r,
                                  epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val / (r * r)


class MCResult(NamedTuple):
    value: complex
    half_width: float  # 99% confidence
    accepted: int
    efficiency: float


def _draw_standard(rng: np.random.Generator, n: int, r: float, s: float, k: int):
    """``k`` uniform proposals in the bounding box of the standard cylinder."""
    box = np.array([r] + [s] * (n - 1))
    x = (2 * rng.random((k, 2 * n)) - 1) * np.repeat(box, 2)
    w = x[:, 0::2] + 1j * x[:, 1::2]
    inside = np.abs(w[:, 0]) < r
    if n > 1:
        inside &= np.sum(np.abs(w[:, 1:]) ** 2, axis=1) < s * s
    return w[inside], inside.mean()


def mc_integral(c: Cylinder, f: Callable[[np.ndarray], np.ndarray], samples: int = 10**6,
                seed: int = 0, batch: int = 2**16) -> MCResult:
    """Monte Carlo estimate of ``int_{a + P} f`` with a 99% confidence half-width.

    Rejection sampling in the bounding box of the standard cylinder, mapped
    by ``w -> a + A w``.  Batches draw from child streams of one seed, so
    the estimate is reproducible bit for bit.
    """
    n = c.n
    vol = math.pi * c.r ** 2 * (math.pi ** (n - 1) * c.s ** (2 * n - 2) / math.gamma(n))
    children = np.random.SeedSequence(seed).spawn(1 + samples // max(1, batch // 128))
    total = 0j
    total_sq = 0.0
    got = 0
    drawn = accepted = 0
    for child in children:
        if got >= samples:
            break
        rng = np.random.Generator(np.random.Philox(child))
        w, _ = _draw_standard(rng, n, c.r, c.s, batch)
        drawn += batch
        accepted += len(w)
        if accepted < 0.01 * drawn:
            raise OracleError(f"rejection efficiency {accepted / drawn:.2%} is below 1%")
        w = w[: samples - got]
        vals = np.asarray(f(c.center + w @ c.frame.T), dtype=complex)
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
        got += len(w)
    if got < samples:
        raise OracleError("ran out of random streams before reaching the sample count")
    mean = total / got
    var = max(total_sq / got - abs(mean) ** 2, 0.0)
    z99 = float(normal_dist.ppf(0.995))
    return MCResult(mean * vol, z99 * math.sqrt(var / got) * vol, got, accepted / drawn)


def _as_holomorphic(h):
    if isinstance(h, str):
        tree = ex.parse(h)
        return lambda z: ex.evaluate(tree, z)
    return h


def pluriharmonic_extremal(h, c: Cylinder) -> Callable[[np.ndarray], np.ndarray]:
    """``f(z) = exp(h(z) - h(a))`` for a holomorphic ``h`` (callable or expression)."""
    h = _as_holomorphic(h)
    h_a = complex(np.asarray(h(c.center[None, :]))[0])

    def f(z):
        z = np.asarray(z, dtype=complex)
        return np.exp(np.asarray(h(z)) - h_a)

    return f
