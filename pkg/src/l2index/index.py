"""The L^2-extension index of a weight on a cylinder, and sweeps over cylinders.

``L = min{ int |f|^2 e^{-phi} : f(a) = 1 } / (|P| e^{-phi(a)})`` with the
conventions ``L = +inf`` when ``phi(a) = +inf`` and ``L = 0`` when
``phi(a) = -inf``.  The minimum is taken over polynomials of bounded degree,
so the computed value is an upper bound of the true index, up to
quadrature error.
"""
from __future__ import annotations

import logging
import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import bergman
from .bergman import DEFAULT_DEGREE, ExtremalFunction, GramSystem
from .geometry import Cylinder, Domain, SizePolicy, sample_cylinder, volume
from .quadrature import DEFAULT_LEVEL, MAX_LEVEL
from .weights import Weight

__all__ = ["Tolerances", "IndexResult", "l2_index", "index_sweep", "DEGREE_CAP", "default_jobs"]

log = logging.getLogger(__name__)

DEGREE_CAP = {1: 16, 2: 12, 3: 6}
JOBS_ENV = "L2INDEX_JOBS"


@dataclass(frozen=True)
class Tolerances:
    """Stopping rule for the degree / quadrature ladder.

    A result is converged when the last degree increment moves the minimum
    by less than ``trunc_rtol`` and one quadrature refinement by less than
    ``quad_rtol`` (both relative).  ``None`` means the per-dimension default.

    The minimum converges much faster than the minimizer.  When the
    coefficients themselves matter, ``coef_atol`` additionally requires the
    coefficients of degree ``<= coef_degree`` (in the ``w`` basis) to move
    by at most ``coef_atol`` over the last ``degree_step`` degrees.
    """

    trunc_rtol: float = 1e-4
    quad_rtol: float = 1e-5
    coef_atol: float | None = None
    coef_degree: int = 6
    degree: int | None = None
    degree_cap: int | None = None
    level: int | None = None
    level_cap: int | None = None
    degree_step: int = 2

    def for_dim(self, n: int) -> "Tolerances":
        degree = self.degree if self.degree is not None else DEFAULT_DEGREE.get(n, 4)
        cap = self.degree_cap if self.degree_cap is not None else max(degree, DEGREE_CAP.get(n, degree))
        level = self.level if self.level is not None else DEFAULT_LEVEL.get(n, 2)
        level_cap = self.level_cap if self.level_cap is not None else max(level, MAX_LEVEL.get(n, level))
        return replace(self, degree=degree, degree_cap=max(cap, degree), level=level,
                       level_cap=max(level_cap, level))


@dataclass(eq=False)
class IndexResult:
    cylinder: Cylinder
    L: float
    bound: float
    norm_sq: float
    trunc_err: float
    quad_err: float
    N_used: int
    level_used: int
    converged: bool
    extremal: ExtremalFunction | None = None
    gram: GramSystem | None = field(default=None, repr=False)
    norm_sq_by_degree: np.ndarray | None = field(default=None, repr=False)
    weight_source: str = ""
    sample_id: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "weight": self.weight_source,
            "cylinder": self.cylinder.to_json(),
            "L": self.L,
            "bound": self.bound,
            "norm_sq": self.norm_sq,
            "trunc_err": self.trunc_err,
            "quad_err": self.quad_err,
            "N": self.N_used,
            "level": self.level_used,
            "converged": self.converged,
            "error": self.error,
        }


def _conventional(c: Cylinder, w: Weight, phi_a: float) -> IndexResult:
    if phi_a == math.inf:
        L, bound = math.inf, 0.0
    else:
        L, bound = 0.0, math.inf
    return IndexResult(c, L, bound, math.nan, 0.0, 0.0, 0, 0, True, weight_source=w.source)


def _coefficients_settled(g: GramSystem, N: int, t: Tolerances) -> bool:
    if t.coef_atol is None:
        return True
    lo = N - t.degree_step
    if lo < t.coef_degree:
        return False
    new = bergman.min_extension(g.truncate(N))
    old = bergman.min_extension(g.truncate(lo))
    k = bergman.basis_size(g.n, t.coef_degree)
    return float(np.max(np.abs(new.coefficients[:k] - old.coefficients[:k]))) <= t.coef_atol


def l2_index(c: Cylinder, w: Weight, tol: Tolerances = Tolerances()) -> IndexResult:
    """Index of ``w`` on the cylinder ``c`` (containment is the caller's job).

    Starting from the default degree and quadrature level, the degree is
    raised while the truncation gap is too large and the level while two
    consecutive levels disagree, up to the caps; a result that hits a cap
    comes back with ``converged=False``.  The reported minimum uses the finer
    of the two quadrature levels.
    """
    if c.n != w.n:
        raise ValueError(f"cylinder in C^{c.n} but weight on C^{w.n}")
    phi_a = float(w(c.center[None, :])[0])
    if math.isnan(phi_a):
        raise bergman.OutOfScope("weight is NaN at the center")
    if math.isinf(phi_a):
        return _conventional(c, w, phi_a)

    t = tol.for_dim(c.n)
    N, level = t.degree, t.level
    cache: dict[tuple[int, int], GramSystem] = {}

    def gram(N, level):
        key = (N, level)
        if key not in cache:
            cache[key] = bergman.assemble_gram(c, w, N, level, phi_a=phi_a)
        return cache[key]

    while True:
        coarse, fine = gram(N, level), gram(N, level + 1)
        conds = bergman.block_conditions(fine)
        usable = [d for d in range(N + 1) if conds[d] <= bergman.COND_MAX]
        if not usable or usable[0] != 0:
            raise bergman.IllConditionedGram("Gram matrix is ill-conditioned even at degree 0")
        N_ok = max(d for d in usable if all(conds[:d + 1] <= bergman.COND_MAX))
        seq_f = bergman.norm_sq_by_degree(fine.truncate(N_ok))
        seq_c = bergman.norm_sq_by_degree(coarse.truncate(N_ok))
        norm = float(seq_f[N_ok])
        trunc = float(seq_f[N_ok - 1] - seq_f[N_ok]) if N_ok >= 1 else math.inf
        quad = float(abs(seq_c[N_ok] - seq_f[N_ok]))
        trunc_ok = trunc <= t.trunc_rtol * norm and _coefficients_settled(fine, N_ok, t)
        quad_ok = quad <= t.quad_rtol * norm
        if trunc_ok and quad_ok:
            converged = True
            break
        if not trunc_ok and N_ok == N and N < t.degree_cap:
            N = min(N + t.degree_step, t.degree_cap)
            continue
        if not quad_ok and level + 1 < t.level_cap:
            level += 1
            continue
        converged = False
        log.info("index unconverged: trunc=%.3e quad=%.3e norm=%.6g N=%d level=%d",
                 trunc, quad, norm, N_ok, level + 1)
        break

    g = fine.truncate(N_ok) if N_ok < fine.N else fine
    extremal = bergman.min_extension(g)
    vol = volume(c)
    bound = vol * math.exp(-phi_a)
    L = float(seq_f[N_ok] * math.exp(phi_a) / vol)
    return IndexResult(c, L, bound, norm, trunc, quad, N_ok,
                       level + 1, converged, extremal, g, seq_f[:N_ok + 1], w.source)


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def _index_task(args):
    sample_id, c, w, tol = args
    try:
        res = l2_index(c, w, tol)
    except (ArithmeticError, ValueError) as exc:
        res = IndexResult(c, math.nan, math.nan, math.nan, math.nan, math.nan, 0, 0, False,
                          weight_source=w.source, error=f"{type(exc).__name__}: {exc}")
    res.sample_id = sample_id
    # keep what a parent process needs; Gram matrices stay in the worker
    res.gram = None
    return res


def _sort_key(res: IndexResult):
    return (not res.ok, res.L if res.ok else 0.0, res.sample_id)


def run_indices(cylinders, w: Weight, tol: Tolerances = Tolerances(), jobs: int | None = None):
    """Index for each cylinder, in input order, optionally in worker processes."""
    jobs = default_jobs() if jobs is None else jobs
    tasks = [(i, c, w, tol) for i, c in enumerate(cylinders)]
    if jobs <= 1 or len(tasks) <= 1:
        return [_index_task(t) for t in tasks]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as pool:
        return list(pool.map(_index_task, tasks))


def sample_cylinders(d: Domain, M: int, seed, policy: SizePolicy = SizePolicy()) -> list[Cylinder]:
    rng = np.random.default_rng(seed)
    return [sample_cylinder(d, rng=rng, policy=policy) for _ in range(M)]


def index_sweep(d: Domain, w: Weight, M: int, seed=0, tol: Tolerances = Tolerances(),
                jobs: int | None = None, policy: SizePolicy = SizePolicy()) -> list[IndexResult]:
    """Index on ``M`` sampled cylinders, sorted by ``L`` (failures last).

    Cylinders are drawn in the calling process from one seeded stream, so
    the output does not depend on ``jobs``.  Per-cylinder failures are
    returned as entries with ``error`` set.
    """
    if M < 1:
        raise ValueError("need at least one sample")
    if d.n != w.n:
        raise ValueError(f"domain in C^{d.n} but weight on C^{w.n}")
    results = run_indices(sample_cylinders(d, M, seed, policy), w, tol, jobs)
    return sorted(results, key=_sort_key)
