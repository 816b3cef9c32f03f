"""Domains in C^n, holomorphic cylinders and the admissible-cylinder sampler.

A cylinder ``a + A(D_r x B^{n-1}_s)`` is stored by its center ``a``, the
disc radius ``r``, the ball radius ``s`` and a unitary frame ``A``.  Points
of the *standard* cylinder are written ``w``; physical points are
``z = a + A w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Domain",
    "Cylinder",
    "SizePolicy",
    "GeometryError",
    "check_unitary",
    "haar_unitary",
    "volume",
    "ball_volume",
    "contains",
    "sample_cylinder",
    "swap_frame",
]

UNITARY_ATOL = 1e-12


class GeometryError(ValueError):
    pass


def _as_cvec(x, n=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=complex))
    if v.ndim != 1:
        raise GeometryError("center must be a vector")
    if n is not None and v.shape[0] == 1 and n > 1:
        v = np.full(n, v[0])
    if n is not None and v.shape[0] != n:
        raise GeometryError(f"expected a vector of length {n}, got {v.shape[0]}")
    v.flags.writeable = False
    return v


def check_unitary(A: np.ndarray, atol: float = UNITARY_ATOL) -> None:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise GeometryError("frame must be a square matrix")
    defect = np.linalg.norm(A.conj().T @ A - np.eye(A.shape[0]))
    if defect > atol:
        raise GeometryError(f"frame is not unitary (||A^H A - I||_F = {defect:.3e})")


@dataclass(frozen=True, eq=False)
class Domain:
    """Ball, polydisc or box in C^n.

    ``box`` intervals are given per real coordinate in the order
    ``Re z1, Im z1, Re z2, ...``.
    """

    shape: str
    n: int
    center: np.ndarray | None = None
    radius: float | None = None
    radii: np.ndarray | None = None
    intervals: np.ndarray | None = None

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError("dimension must be >= 1")
        if self.shape == "ball":
            object.__setattr__(self, "center", _as_cvec(self.center, self.n))
            if not (self.radius is not None and self.radius > 0):
                raise GeometryError("ball radius must be positive")
            object.__setattr__(self, "radius", float(self.radius))
        elif self.shape == "polydisc":
            object.__setattr__(self, "center", _as_cvec(self.center, self.n))
            radii = np.atleast_1d(np.asarray(self.radii, dtype=float))
            if radii.shape[0] == 1 and self.n > 1:
                radii = np.full(self.n, radii[0])
            if radii.shape != (self.n,) or np.any(radii <= 0):
                raise GeometryError("polydisc radii must be n positive numbers")
            radii.flags.writeable = False
            object.__setattr__(self, "radii", radii)
        elif self.shape == "box":
            iv = np.asarray(self.intervals, dtype=float)
            if iv.shape != (2 * self.n, 2) or np.any(iv[:, 1] <= iv[:, 0]):
                raise GeometryError("box needs 2n nonempty intervals (lo < hi)")
            iv.flags.writeable = False
            object.__setattr__(self, "intervals", iv)
            mid = iv.mean(axis=1)
            object.__setattr__(self, "center", _as_cvec(mid[0::2] + 1j * mid[1::2]))
        else:
            raise GeometryError(f"unknown domain shape {self.shape!r}")

    @classmethod
    def ball(cls, center, radius: float, n: int | None = None) -> "Domain":
        n = n if n is not None else np.atleast_1d(center).shape[0]
        return cls("ball", n, center=center, radius=radius)

    @classmethod
    def polydisc(cls, center, radii, n: int | None = None) -> "Domain":
        n = n if n is not None else max(np.atleast_1d(center).shape[0], np.atleast_1d(radii).shape[0])
        return cls("polydisc", n, center=center, radii=radii)

    @classmethod
    def box(cls, intervals) -> "Domain":
        iv = np.asarray(intervals, dtype=float)
        return cls("box", iv.shape[0] // 2, intervals=iv)

    def boundary_distance(self, z) -> float:
        """Distance from ``z`` to the complement of the domain (<= 0 outside)."""
        z = _as_cvec(z, self.n)
        if self.shape == "ball":
            return self.radius - float(np.linalg.norm(z - self.center))
        if self.shape == "polydisc":
            return float(np.min(self.radii - np.abs(z - self.center)))
        x = np.empty(2 * self.n)
        x[0::2], x[1::2] = z.real, z.imag
        return float(np.min(np.minimum(x - self.intervals[:, 0], self.intervals[:, 1] - x)))

    def to_json(self) -> dict:
        out: dict = {"shape": self.shape, "n": self.n}
        if self.shape == "ball":
            out["center"] = [[v.real, v.imag] for v in self.center]
            out["radius"] = self.radius
        elif self.shape == "polydisc":
            out["center"] = [[v.real, v.imag] for v in self.center]
            out["radii"] = list(map(float, self.radii))
        else:
            out["intervals"] = self.intervals.tolist()
        return out


@dataclass(frozen=True, eq=False)
class Cylinder:
    center: np.ndarray
    r: float
    s: float = 1.0
    frame: np.ndarray = field(default=None)

    def __post_init__(self):
        a = _as_cvec(self.center)
        n = a.shape[0]
        object.__setattr__(self, "center", a)
        if not (self.r > 0 and self.s > 0):
            raise GeometryError("cylinder radii must be positive")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "s", float(self.s))
        A = np.eye(n, dtype=complex) if self.frame is None else np.array(self.frame, dtype=complex)
        if A.shape != (n, n):
            raise GeometryError(f"frame must be {n}x{n}")
        check_unitary(A)
        A.flags.writeable = False
        object.__setattr__(self, "frame", A)

    @property
    def n(self) -> int:
        return self.center.shape[0]

    @property
    def enclosing_radius(self) -> float:
        return self.r if self.n == 1 else math.hypot(self.r, self.s)

    def to_physical(self, w: np.ndarray) -> np.ndarray:
        """Map standard-cylinder points ``w`` (shape ``(..., n)``) to ``a + A w``."""
        return self.center + w @ self.frame.T

    def with_frame(self, frame) -> "Cylinder":
        return Cylinder(self.center, self.r, self.s, frame)

    def to_json(self) -> dict:
        return {
            "shape": "cylinder",
            "center": [[v.real, v.imag] for v in self.center],
            "r": self.r,
            "s": self.s,
            "A": [[[v.real, v.imag] for v in row] for row in self.frame],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Cylinder":
        a = [complex(re, im) for re, im in obj["center"]]
        A = [[complex(re, im) for re, im in row] for row in obj["A"]]
        return cls(a, obj["r"], obj["s"], A)


def ball_volume(radius: float, m: int) -> float:
    """Lebesgue volume of the ball of the given radius in C^m."""
    return math.pi ** m * radius ** (2 * m) / math.factorial(m)


def volume(c: Cylinder) -> float:
    """Volume of ``P_{r,s,A}``; the frame plays no role."""
    v = math.pi * c.r ** 2
    if c.n > 1:
        v *= ball_volume(c.s, c.n - 1)
    return v


def contains(d: Domain, c: Cylinder) -> bool:
    """Conservative containment test of ``c`` in ``d``.

    The cylinder sits inside the closed ball of radius ``sqrt(r^2 + s^2)``
    about its center, so it suffices to compare that radius with the
    distance to the boundary.  Never returns True for a cylinder that
    leaves the domain.
    """
    if d.n != c.n:
        raise GeometryError(f"dimension mismatch: domain n={d.n}, cylinder n={c.n}")
    return c.enclosing_radius <= d.boundary_distance(c.center)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def swap_frame(n: int, i: int = 0, j: int = 1) -> np.ndarray:
    """Permutation frame exchanging coordinates ``i`` and ``j``."""
    A = np.eye(n, dtype=complex)
    A[[i, j]] = A[[j, i]]
    return A


@dataclass(frozen=True)
class SizePolicy:
    """How ``sample_cylinder`` draws centers and radii.

    Centers come uniformly from the domain shrunk by ``shrink`` about its
    center; the enclosing radius is ``rho_frac`` (uniform in the interval)
    times the distance to the boundary, split between ``r`` and ``s`` at an
    angle drawn from ``[angle_min, pi/2 - angle_min]``.
    """

    shrink: float = 0.5
    rho_frac: tuple[float, float] = (0.5, 0.95)
    angle_min: float = math.pi / 8
    min_radius: float = 1e-3
    max_tries: int = 100


def _uniform_in_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    x = rng.standard_normal(2 * n)
    x *= radius * rng.random() ** (1.0 / (2 * n)) / np.linalg.norm(x)
    return x[0::2] + 1j * x[1::2]


def _draw_center(d: Domain, rng: np.random.Generator, shrink: float) -> np.ndarray:
    if d.shape == "ball":
        return d.center + _uniform_in_ball(rng, d.n, shrink * d.radius)
    if d.shape == "polydisc":
        rad = shrink * d.radii * np.sqrt(rng.random(d.n))
        return d.center + rad * np.exp(2j * math.pi * rng.random(d.n))
    lo, hi = d.intervals[:, 0], d.intervals[:, 1]
    mid, half = (lo + hi) / 2, shrink * (hi - lo) / 2
    x = mid + half * (2 * rng.random(2 * d.n) - 1)
    return x[0::2] + 1j * x[1::2]


def sample_cylinder(d: Domain, seed=None, policy: SizePolicy = SizePolicy(), rng=None) -> Cylinder:
    """Draw an admissible cylinder in ``d``.

    Pass either ``seed`` (a fresh generator is made) or a ``rng`` to draw
    several cylinders from one stream.
    """
    rng = np.random.default_rng(seed) if rng is None else rng
    lo, hi = policy.rho_frac
    for _ in range(policy.max_tries):
        a = _draw_center(d, rng, policy.shrink)
        dist = d.boundary_distance(a)
        rho = dist * (lo + (hi - lo) * rng.random())
        if d.n == 1:
            r, s = rho, 1.0
        else:
            theta = policy.angle_min + (math.pi / 2 - 2 * policy.angle_min) * rng.random()
            r, s = rho * math.cos(theta), rho * math.sin(theta)
        A = haar_unitary(d.n, rng)
        if min(r, s) < policy.min_radius:
            continue
        c = Cylinder(a, r, s, A)
        if contains(d, c):
            return c
    raise GeometryError(f"no admissible cylinder after {policy.max_tries} tries")
