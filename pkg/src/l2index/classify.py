"""Turning sampled indices and polynomial-twist tests into a verdict on a weight.

Per cylinder, ``L`` below, at, or above 1 is read with an error bar built
from the truncation and quadrature estimates.  Over a sweep, ``L <= 1``
everywhere is evidence for plurisubharmonicity, ``L >= 1`` everywhere for
plurisuperharmonicity, and ``L == 1`` everywhere for pluriharmonicity.
The twist test checks the inequality

    int |e^g|^2 e^{-phi} >= |P| |e^{g(a)}|^2 e^{-phi(a)}

for a fixed family of polynomials ``g``; it must hold whenever ``phi`` is
plurisuperharmonic, so a failure vetoes an ``L >= 1`` label.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .geometry import Cylinder, volume
from .index import IndexResult
from .quadrature import DEFAULT_LEVEL, QuadratureError, unit_cylinder_rule
from .weights import Weight

__all__ = [
    "TOL_EQ_FLOOR",
    "LABELS",
    "TRUTH_LABELS",
    "Twist",
    "TwistEntry",
    "Verdict",
    "tol_eq",
    "classify_cylinder",
    "default_twists",
    "twist_test",
    "verdict",
    "uniqueness_check",
    "exhibit_non_uniqueness",
]

TOL_EQ_FLOOR = 1e-4
TWIST_RTOL = 1e-10

LABELS = ("pluriharmonic_consistent", "psh_consistent_strict", "superharmonic_consistent_strict",
          "mixed", "inconclusive")
CLASSES = ("below_one", "equal_one", "above_one", "unresolved")

# labels a correct classifier may return for each catalog truth tag
TRUTH_LABELS = {
    "pluriharmonic": {"pluriharmonic_consistent"},
    "psh_strict": {"psh_consistent_strict"},
    "psh": {"psh_consistent_strict", "pluriharmonic_consistent"},
    "superharmonic_strict": {"superharmonic_consistent_strict"},
    "mixed": {"mixed"},
}


def tol_eq(res: IndexResult) -> float:
    """Half-width of the band around 1 read as equality."""
    if not (res.bound > 0 and math.isfinite(res.bound)):
        return TOL_EQ_FLOOR
    err = 3 * (res.trunc_err + res.quad_err) / res.bound
    return max(err, TOL_EQ_FLOOR) if math.isfinite(err) else math.inf


def classify_cylinder(res: IndexResult, tol: float | None = None) -> str:
    if not res.ok or not res.converged or math.isnan(res.L):
        return "unresolved"
    t = tol_eq(res) if tol is None else max(tol, tol_eq(res))
    if abs(res.L - 1) <= t:
        return "equal_one"
    if res.L < 1 - t:
        return "below_one"
    if res.L > 1 + t:
        return "above_one"
    return "unresolved"


# -- twists --------------------------------------------------------------------


@dataclass(frozen=True)
class Twist:
    """A holomorphic polynomial ``g`` written in the weight language."""

    source: str
    tree: ex.Node = field(repr=False, compare=False)

    @classmethod
    def parse(cls, source: str, n: int) -> "Twist":
        tree = ex.parse(source, n)
        for node in ex.walk(tree):
            if isinstance(node, ex.Call) or (isinstance(node, ex.BinOp) and node.op == "/") \
                    or (isinstance(node, ex.Pow) and node.exponent < 0):
                raise ValueError(f"twist {source!r} is not a polynomial in z")
        return cls(source, tree)

    def __call__(self, z):
        return ex.evaluate(self.tree, z)


def default_twists(n: int) -> list[Twist]:
    srcs = ["0", "z1", "1i*z1", "z1^2", "0.5*z1", "2*z1"]
    if n >= 2:
        srcs += ["z2", "z1*z2"]
    return [Twist.parse(s, n) for s in srcs]


@dataclass
class TwistEntry:
    twist: str
    cylinder_id: int
    lhs: float
    rhs: float
    margin: float
    err: float
    holds: bool
    error: str | None = None

    def to_json(self) -> dict:
        return {"g": self.twist, "cylinder": self.cylinder_id, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin, "err": self.err, "holds": self.holds, "error": self.error}


def _twist_sums(c: Cylinder, w: Weight, twists, level: int):
    rule = unit_cylinder_rule(c.n, level)
    radii = np.array([c.r] + [c.s] * (c.n - 1))
    z = c.to_physical(rule.nodes * radii)
    psi = np.asarray(w(z), dtype=float)
    if not np.all(np.isfinite(psi)):
        raise QuadratureError("weight is not finite at a quadrature node")
    wts = rule.weights * float(np.prod(radii ** 2))
    out = []
    for g in twists:
        expo = 2 * np.asarray(g(z)).real - psi
        shift = 2 * complex(g(c.center[None, :])[0]).real - float(w(c.center[None, :])[0])
        out.append(float(np.sum(wts * np.exp(expo - shift))))
    return np.array(out)


def twist_test(w: Weight, cylinders, twists=None, level: int | None = None,
               rtol: float = TWIST_RTOL) -> list[TwistEntry]:
    """Both sides of the twisted mean-value inequality on each cylinder.

    Sums are normalized by ``|e^{g(a)}|^2 e^{-phi(a)}`` before being scaled
    back, and the error is the change under one quadrature refinement.  An
    entry holds when ``lhs - rhs >= -(3 err + rtol rhs)``.
    """
    twists = default_twists(w.n) if twists is None else [
        t if isinstance(t, Twist) else Twist.parse(t, w.n) for t in twists]
    entries = []
    for cid, c in enumerate(cylinders):
        lev = DEFAULT_LEVEL.get(c.n, 2) + 1 if level is None else level
        vol = volume(c)
        try:
            coarse = _twist_sums(c, w, twists, lev)
            fine = _twist_sums(c, w, twists, lev + 1)
        except (ArithmeticError, ValueError) as exc:
            for g in twists:
                entries.append(TwistEntry(g.source, cid, math.nan, math.nan, math.nan, math.nan,
                                          False, f"{type(exc).__name__}: {exc}"))
            continue
        phi_a = float(w(c.center[None, :])[0])
        for g, lo, hi in zip(twists, coarse, fine):
            scale = math.exp(2 * complex(g(c.center[None, :])[0]).real - phi_a)
            lhs, rhs = hi * scale, vol * scale
            err = abs(hi - lo) * scale
            margin = lhs - rhs
            entries.append(TwistEntry(g.source, cid, float(lhs), float(rhs), float(margin), float(err),
                                      bool(margin >= -(3 * err + rtol * rhs))))
    return entries


# -- verdict -------------------------------------------------------------------


@dataclass
class Verdict:
    label: str
    counts: dict
    L_min: float
    L_max: float
    margin_min: tuple  # (L - 1, error bar) at the smallest L
    margin_max: tuple
    tol_eq: float
    twist: list = field(default_factory=list)
    twist_disagrees: bool = False
    L_label: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "counts": dict(self.counts),
            "L_min": self.L_min,
            "L_max": self.L_max,
            "margin_min": list(self.margin_min),
            "margin_max": list(self.margin_max),
            "tol_eq": self.tol_eq,
            "index_label": self.L_label,
            "twist_disagrees": self.twist_disagrees,
            "twist": [t.to_json() for t in self.twist],
        }

    def summary(self) -> str:
        c = self.counts
        lines = [
            f"verdict: {self.label}",
            f"  cylinders: {sum(c.values())} (below 1: {c['below_one']}, at 1: {c['equal_one']}, "
            f"above 1: {c['above_one']}, unresolved: {c['unresolved']})",
            f"  L range: [{self.L_min:.6g}, {self.L_max:.6g}], equality band +/-{self.tol_eq:.2g}",
        ]
        if self.twist:
            held = sum(t.holds for t in self.twist)
            lines.append(f"  twist inequality held in {held}/{len(self.twist)} tests")
        if self.twist_disagrees:
            lines.append(f"  index evidence ({self.L_label}) contradicted by twist failures")
        return "\n".join(lines)


def _label_from_counts(counts: dict) -> str:
    below, equal, above, unres = (counts[k] for k in CLASSES)
    if below and above:
        return "mixed"
    if unres:
        return "inconclusive"
    if below:
        return "psh_consistent_strict"
    if above:
        return "superharmonic_consistent_strict"
    if equal:
        return "pluriharmonic_consistent"
    return "inconclusive"


def verdict(sweep: list[IndexResult], twist: list[TwistEntry] | None = None,
            tol: float | None = None) -> Verdict:
    """Combine per-cylinder classes; twist failures veto ``L >= 1`` labels."""
    if not sweep:
        raise ValueError("empty sweep")
    classes = [classify_cylinder(r, tol) for r in sweep]
    counts = {k: classes.count(k) for k in CLASSES}
    label = _label_from_counts(counts)
    good = [r for r in sweep if r.ok and not math.isnan(r.L)]
    if good:
        lo = min(good, key=lambda r: r.L)
        hi = max(good, key=lambda r: r.L)
        L_min, L_max = lo.L, hi.L
        m_min = (lo.L - 1, tol_eq(lo))
        m_max = (hi.L - 1, tol_eq(hi))
        t_eq = max(tol_eq(r) for r in good)
    else:
        L_min = L_max = math.nan
        m_min = m_max = (math.nan, math.nan)
        t_eq = math.nan
    if tol is not None:
        t_eq = max(t_eq, tol)

    twist = twist or []
    disagrees = False
    if label in ("pluriharmonic_consistent", "superharmonic_consistent_strict"):
        band = max(TOL_EQ_FLOOR, tol or 0.0)
        disagrees = any(e.error is None and e.margin < -(3 * e.err + band * e.rhs) for e in twist)
    return Verdict("inconclusive" if disagrees else label, counts, L_min, L_max, m_min, m_max,
                   t_eq, twist, disagrees, label)


# -- uniqueness ----------------------------------------------------------------


def uniqueness_check(res: IndexResult, tol: float | None = None) -> bool:
    """Equality ``norm_sq == bound`` within ``tol`` (relative).

    Strict ``norm_sq < bound`` leaves room for other admissible functions
    (see ``exhibit_non_uniqueness``); ``norm_sq > bound`` leaves none.
    """
    if not (res.ok and math.isfinite(res.L)):
        return False
    t = tol_eq(res) if tol is None else tol
    return abs(res.norm_sq - res.bound) <= t * res.bound


def exhibit_non_uniqueness(res: IndexResult, eps: float | None = None):
    """Perturb the extremal function by ``eps * w_1`` and re-evaluate its norm.

    ``w_1`` vanishes at the center, so the perturbed function is still
    normalized.  The minimizer is orthogonal to such directions, hence the
    norm grows by exactly ``eps^2 ||w_1||^2``.  Without ``eps``, half of the
    available slack is used.  Returns ``(eps, norm_sq, admissible)``.
    """
    if res.gram is None or res.extremal is None:
        raise ValueError("result carries no Gram system")
    g = res.gram
    G = g.G
    d = np.zeros(len(g.exps), dtype=complex)
    d[1] = 1.0  # first degree-one monomial, w_1
    dGd = float(np.real(d.conj() @ G @ d))
    if eps is None:
        slack = res.bound - res.norm_sq
        eps = math.sqrt(slack / (2 * dGd)) if slack > 0 else 0.0
    c = res.extremal.coefficients + eps * d
    norm = float(np.real(c.conj() @ G @ c))
    return eps, norm, bool(norm <= res.bound)
