"""Oracle-equivalence and invariant checks runnable from the command line."""
from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np

from . import geometry, levi, oracle, quadrature
from .bergman import assemble_gram, norm_sq_by_degree
from .classify import TRUTH_LABELS, twist_test, uniqueness_check, verdict
from .geometry import Cylinder, Domain, swap_frame
from .index import index_sweep, l2_index, sample_cylinders
from .weights import catalog, catalog_weight, radial_weight

_CHECKS = []


def check(quick=False):
    def deco(fn):
        _CHECKS.append((fn.__name__.removeprefix("check_"), fn, quick))
        return fn
    return deco


@check(quick=True)
def check_volume():
    cases = [(1, 1.0, 1.0, math.pi), (2, 1.0, 1.0, math.pi ** 2), (3, 1.0, 2.0, 8 * math.pi ** 3)]
    worst = 0.0
    for n, r, s, want in cases:
        c = Cylinder(np.zeros(n), r, s)
        got = geometry.volume(c)
        rule_total = quadrature.cylinder_rule(n, r, s, 4).total
        worst = max(worst, abs(got - want) / want, abs(got - rule_total) / want)
    return worst < 1e-10, f"max relative deviation {worst:.2e}"


@check(quick=True)
def check_gram_unit_disc():
    g = assemble_gram(Cylinder([0], 1.0), catalog_weight("zero", 1), 2)
    err = np.max(np.abs(g.G - np.diag([math.pi, math.pi / 2, math.pi / 3])))
    return err < 1e-12, f"|G - diag(pi, pi/2, pi/3)| = {err:.2e}"


@check(quick=True)
def check_flat_index():
    worst = 0.0
    for n in (1, 2):
        d = Domain.ball(np.zeros(n), 1.0)
        for c in sample_cylinders(d, 3, seed=11):
            worst = max(worst, abs(l2_index(c, catalog_weight("zero", n)).L - 1))
    return worst < 1e-8, f"max |L - 1| = {worst:.2e}"


@check(quick=True)
def check_radial_oracle():
    worst = 0.0
    for key, prof in [("t2", lambda t: t * t), ("neg_t2", lambda t: -t * t)]:
        for r in (0.5, 1.0):
            L = l2_index(Cylinder([0], r), radial_weight(prof, 1)).L
            worst = max(worst, abs(L - oracle.radial_index(oracle.RADIAL_PROFILES[key], r)))
    return worst < 1e-6, f"max |L - radial oracle| = {worst:.2e}"


@check(quick=True)
def check_pluriharmonic_equality():
    res = l2_index(Cylinder([0], 1.0), catalog_weight("plh_linear", 1))
    coeff_err = max(abs(res.extremal.coefficients[k] - 1 / math.factorial(k)) for k in range(7))
    ok = abs(res.L - 1) < 5e-4 and uniqueness_check(res) and coeff_err < 1e-4
    return ok, f"|L - 1| = {abs(res.L - 1):.2e}, coefficient error {coeff_err:.2e}"


@check(quick=True)
def check_twist_signs():
    c = Cylinder([0], 1.0)
    up = twist_test(catalog_weight("neg_gauss", 1), [c])
    down = twist_test(catalog_weight("gauss", 1), [c], ["0"])[0]
    ok = all(e.holds for e in up) and down.margin <= -0.3 * math.pi * math.exp(-1)
    return ok, f"neg_gauss all hold: {all(e.holds for e in up)}, gauss g=0 margin {down.margin:.4f}"


@check()
def check_pluriharmonic_sweeps():
    d = Domain.ball(np.zeros(2), 1.0)
    worst = 0.0
    for name in ("plh_linear", "plh_quad", "plh_mixed"):
        for res in index_sweep(d, catalog_weight(name, 2), 10, seed=3):
            worst = max(worst, abs(res.L - 1))
    return worst < 5e-4, f"max |L - 1| = {worst:.2e}"


@check()
def check_monotone_in_degree():
    d = Domain.ball(np.zeros(1), 1.0)
    worst = 0.0
    for w in catalog(1):
        for c in sample_cylinders(d, 3, seed=5):
            seq = norm_sq_by_degree(assemble_gram(c, w, 12, 6))[2:]
            worst = max(worst, float(np.max(np.diff(seq), initial=0.0)))
    return worst <= 1e-12, f"largest increase {worst:.2e}"


@check()
def check_mc_vs_quadrature():
    c = Cylinder([0.1, -0.2j], 0.7, 0.5, geometry.haar_unitary(2, np.random.default_rng(2)))
    f = lambda z: np.exp(-np.sum(np.abs(z) ** 2, axis=-1))
    q = quadrature.integrate(c, f)
    mc = oracle.mc_integral(c, f, 10**6, seed=1)
    gap = abs(q.value - mc.value)
    return gap <= max(mc.half_width, 10 * q.err), f"gap {gap:.2e}, MC half-width {mc.half_width:.2e}"


@check()
def check_mixed_frames():
    w = catalog_weight("saddle", 2)
    base = Cylinder([0, 0], 0.8, 0.2)
    L_id = l2_index(base, w).L
    L_sw = l2_index(base.with_frame(swap_frame(2)), w).L
    return L_id < 1 - 1e-3 and L_sw > 1 + 1e-3, f"L(identity) = {L_id:.5f}, L(swap) = {L_sw:.5f}"


@check()
def check_classifier_labels():
    d = Domain.ball(np.zeros(2), 1.0)
    bad = []
    for name, M in (("gauss", 10), ("neg_gauss", 10), ("plh_linear", 10), ("saddle", 30)):
        w = catalog_weight(name, 2)
        sweep = index_sweep(d, w, M, seed=0)
        v = verdict(sweep, twist_test(w, [r.cylinder for r in sweep[:4]]))
        if v.label not in TRUTH_LABELS[w.truth]:
            bad.append(f"{name}:{v.label}")
    return not bad, "all labels match" if not bad else "mismatch " + ", ".join(bad)


@check()
def check_levi_form():
    pts = np.random.default_rng(4).standard_normal((5, 2)) * 0.3 + 0j
    got = {w.name: levi.sample_levi_class(w, pts) for w in catalog(2) if w.smooth}
    want = {"zero": "pluriharmonic", "gauss": "psh", "neg_gauss": "superharmonic", "saddle": "mixed"}
    bad = [k for k, v in want.items() if got[k] != v]
    return not bad, f"levi classes {got}"


def available() -> list[str]:
    return [name for name, _, _ in _CHECKS]


@contextmanager
def injected_fault(kind: str | None):
    """Negative controls: deliberately break a formula for the duration."""
    if kind is None:
        yield
        return
    if kind != "volume":
        raise ValueError(f"unknown fault {kind!r}")
    original = geometry.volume
    geometry.volume = lambda c: 1.01 * original(c)
    try:
        yield
    finally:
        geometry.volume = original


def run(quick: bool = False, fault: str | None = None, only=None) -> dict:
    t0 = time.perf_counter()
    out = []
    with injected_fault(fault):
        for name, fn, is_quick in _CHECKS:
            if quick and not is_quick:
                continue
            if only and name not in only:
                continue
            t = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crashing check is a failing check
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            out.append({"name": name, "passed": bool(passed), "detail": detail,
                        "seconds": round(time.perf_counter() - t, 3)})
    return {"passed": all(c["passed"] for c in out), "quick": quick,
            "seconds": round(time.perf_counter() - t0, 3), "checks": out}
