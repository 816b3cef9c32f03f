"""Command-line front end: ``l2index index|classify|selftest|oracle``.

Every subcommand prints one JSON document on stdout; human-readable notes go
to stderr.  Exit codes: 0 success (converged), 2 unconverged index, 1 run
time error, 64 bad flags.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings

import numpy as np

from . import __version__, oracle, selftest
from . import expr as ex
from .bergman import kernel_diag
from .classify import (classify_cylinder, default_twists, Twist, twist_test, uniqueness_check,
                       verdict)
from .geometry import (Cylinder, Domain, GeometryError, contains, haar_unitary, sample_cylinder,
                       swap_frame, volume)
from .index import Tolerances, default_jobs, index_sweep, l2_index
from .jsonio import dumps, results_csv
from .weights import WeightError, resolve

EXIT_OK, EXIT_ERROR, EXIT_UNCONVERGED, EXIT_USAGE = 0, 1, 2, 64

DOMAIN_HELP = """\
domain syntax:
  ball:<center>:<radius>        e.g. ball:0:2, ball:0,0.5j:1
  polydisc:<center>:<r1,..>     e.g. polydisc:0:1,2 (one radius per coordinate)
  box:<lo,hi;...>               e.g. box:-1,1;-1,1 (intervals for Re z1, Im z1, Re z2, ...)
A center is a comma-separated list of complex numbers (1+2j); a single entry
is repeated in every coordinate.

weights are either catalog:<name> or an expression in z1..zn with + - * / ^,
re, im, abs, abs2, exp, log, conj and the constant i (e.g. "abs2(z1) - abs2(z2)").
"""


class UsageError(Exception):
    """Malformed flag value; reported with exit code 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- flag values ---------------------------------------------------------------


def _complex(tok: str) -> complex:
    t = tok.strip().replace("i", "j")
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f"not a complex number: {tok!r}") from None


def parse_complex_list(text: str) -> np.ndarray:
    return np.array([_complex(t) for t in text.split(",") if t.strip()], dtype=complex)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None


def parse_domain(spec: str, n: int | None = None) -> Domain:
    """Domain from the mini-syntax above; ``n`` broadcasts scalar centers."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ball":
            center, _, radius = rest.rpartition(":")
            c = parse_complex_list(center)
            return Domain.ball(c, float(radius), n=n or len(c))
        if kind == "polydisc":
            center, _, radii = rest.rpartition(":")
            c, r = parse_complex_list(center), _floats(radii)
            return Domain.polydisc(c, r, n=n or max(len(c), len(r)))
        if kind == "box":
            iv = [_floats(p) for p in rest.split(";") if p.strip()]
            if len(iv) == 2 and n and n > 1:
                iv = iv * n
            return Domain.box(iv)
    except (ValueError, GeometryError) as exc:
        raise UsageError(f"bad domain {spec!r}: {exc}") from None
    raise UsageError(f"bad domain {spec!r}; expected ball:, polydisc: or box:")


def _domain_dim(spec: str) -> int | None:
    """Dimension fixed by the domain syntax itself, if any."""
    kind, _, rest = spec.partition(":")
    if kind == "box":
        k = len([p for p in rest.split(";") if p.strip()])
        return k // 2 if k > 2 else None
    head, _, tail = rest.rpartition(":")
    sizes = [len(head.split(","))] + ([len(tail.split(","))] if kind == "polydisc" else [])
    return max(sizes) if max(sizes) > 1 else None


def _resolve_weight(spec: str, n: int | None):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            w = resolve(spec, n)
    except ex.ExprSyntaxError as exc:
        raise UsageError(f"bad weight expression: {exc}") from None
    except WeightError as exc:
        raise UsageError(str(exc)) from None
    for c in caught:
        print(f"warning: {c.message}", file=sys.stderr)
    return w


def setup(args):
    """Weight and domain with a consistent dimension."""
    n = args.dim
    if n is None:
        n = _domain_dim(args.domain)
    center = getattr(args, "center", None)
    if n is None and center is not None and len(parse_complex_list(center)) > 1:
        n = len(parse_complex_list(center))
    w = _resolve_weight(args.weight, n)
    d = parse_domain(args.domain, w.n)
    if d.n != w.n:
        raise UsageError(f"domain is in C^{d.n} but the weight is on C^{w.n}")
    return w, d


def _tolerances(args) -> Tolerances:
    if args.degree is not None and args.degree < 0:
        raise UsageError("--degree must be >= 0")
    if args.quad_level is not None and args.quad_level < 1:
        raise UsageError("--quad-level must be >= 1")
    # an explicit degree or level is a floor for the adaptive ladder, not a cap
    return Tolerances(degree=args.degree, level=args.quad_level, coef_atol=args.coef_tol)


# -- subcommands ---------------------------------------------------------------


def _cylinder(args, d: Domain) -> Cylinder:
    n = d.n
    rng = np.random.default_rng(args.seed)
    if args.r is None:
        if args.center is not None:
            raise UsageError("--center needs --r")
        c = sample_cylinder(d, rng=rng)
        frames = {"identity": np.eye(n), "swap": swap_frame(n) if n > 1 else np.eye(n)}
        return c.with_frame(frames[args.frame]) if args.frame in frames else c
    center = d.center if args.center is None else parse_complex_list(args.center)
    if len(center) == 1 and n > 1:
        center = np.full(n, center[0])
    if len(center) != n:
        raise UsageError(f"--center has {len(center)} entries, expected {n}")
    if args.frame == "random":
        frame = haar_unitary(n, rng)
    elif args.frame == "swap":
        if n < 2:
            raise UsageError("--frame swap needs n >= 2")
        frame = swap_frame(n)
    else:
        frame = np.eye(n)
    if args.r <= 0 or (args.s is not None and args.s <= 0):
        raise UsageError("--r and --s must be positive")
    return Cylinder(center, args.r, args.r if args.s is None else args.s, frame)


def cmd_index(args) -> int:
    w, d = setup(args)
    tol = _tolerances(args)
    c = _cylinder(args, d)
    if not contains(d, c):
        print("error: the cylinder is not contained in the domain", file=sys.stderr)
        return EXIT_ERROR
    res = l2_index(c, w, tol)
    out = res.to_json()
    out["unique"] = uniqueness_check(res)
    out["kernel_diag"] = kernel_diag(res.gram) if res.gram is not None else (
        math.inf if res.L == 0 else 0.0)
    out["class"] = classify_cylinder(res)
    sys.stdout.write(dumps(out))
    if args.dump_gram:
        art = {"index": out,
               "gram": res.gram.to_json() if res.gram is not None else None,
               "minimizer": None if res.extremal is None else {
                   "basis": res.extremal.exps.tolist(),
                   "coefficients": [[z.real, z.imag] for z in res.extremal.coefficients],
                   "norm_sq": res.extremal.norm_sq}}
        with open(args.dump_gram, "w") as fh:
            fh.write(dumps(art))
    return EXIT_OK if res.converged else EXIT_UNCONVERGED


def cmd_classify(args) -> int:
    w, d = setup(args)
    tol = _tolerances(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    jobs = default_jobs() if args.jobs is None else args.jobs
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    try:
        twists = default_twists(w.n) + [Twist.parse(t, w.n) for t in args.twist]
    except (ex.ExprSyntaxError, ValueError) as exc:
        raise UsageError(f"bad --twist: {exc}") from None
    sweep = index_sweep(d, w, args.samples, seed=args.seed, tol=tol, jobs=jobs)
    by_id = sorted(sweep, key=lambda r: r.sample_id)
    probe = [r.cylinder for r in by_id[:args.twist_cylinders]]
    tw = twist_test(w, probe, twists)
    v = verdict(sweep, tw)
    classes = [classify_cylinder(r) for r in sweep]
    sys.stdout.write(dumps(v.to_json()))
    print(v.summary(), file=sys.stderr)
    if args.out:
        results = []
        for r, cls in zip(sweep, classes):
            row = r.to_json()
            row["class"] = cls
            results.append(row)
        doc = {"weight": w.source, "n": w.n, "domain": d.to_json(), "samples": args.samples,
               "seed": args.seed, "verdict": v.to_json(), "results": results}
        with open(args.out, "w") as fh:
            fh.write(dumps(doc))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(results_csv(zip(sweep, classes)))
    return EXIT_OK


def cmd_selftest(args) -> int:
    only = args.only.split(",") if args.only else None
    if only:
        unknown = set(only) - set(selftest.available())
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
    report = selftest.run(quick=args.quick, fault=args.inject_fault, only=only)
    sys.stdout.write(dumps(report))
    for chk in report["checks"]:
        print(f"{'PASS' if chk['passed'] else 'FAIL'} {chk['name']}: {chk['detail']}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_ERROR


def cmd_oracle(args) -> int:
    if args.oracle == "radial":
        prof = oracle.RADIAL_PROFILES[args.profile]
        out = {"profile": args.profile, "r": args.r, "L": oracle.radial_index(prof, args.r)}
    else:
        w, d = setup(args)
        c = _cylinder(args, d)
        phi_a = float(w(c.center[None, :])[0])
        bound = volume(c) * math.exp(-phi_a)
        if args.oracle == "mc":
            # energy of f = 1, an upper bound for the minimum
            f = lambda z: np.exp(-w(z))
        else:
            g = oracle.pluriharmonic_extremal(args.h, c)
            f = lambda z: np.abs(g(z)) ** 2 * np.exp(-w(z))
        mc = oracle.mc_integral(c, f, args.samples, seed=args.seed)
        out = {"oracle": args.oracle, "weight": w.source, "cylinder": c.to_json(),
               "integral": mc.value.real, "half_width": mc.half_width, "bound": bound,
               "ratio": mc.value.real / bound, "samples": mc.accepted}
    sys.stdout.write(dumps(out))
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _problem_flags(p, with_tol=True):
    p.add_argument("--weight", required=True, help="expression or catalog:<name>")
    p.add_argument("--domain", required=True, help="see 'domain syntax' below")
    p.add_argument("--dim", type=int, help="dimension n (inferred when omitted)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    if with_tol:
        p.add_argument("--degree", type=int, help="starting polynomial degree")
        p.add_argument("--quad-level", type=int, help="starting quadrature level")
        p.add_argument("--coef-tol", type=float,
                       help="also require minimizer coefficients of degree <= 6 to settle to this")


def _cylinder_flags(p):
    p.add_argument("--center", help="cylinder center, comma-separated complex numbers")
    p.add_argument("--r", type=float, help="disc radius (omit to sample a cylinder)")
    p.add_argument("--s", type=float, help="ball radius (default: --r)")
    p.add_argument("--frame", choices=("random", "identity", "swap"), help="unitary frame (default: identity with --r, Haar random when sampling)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    top = _Parser(prog="l2index", description="L^2-extension index of weights on holomorphic cylinders.",
                  epilog=DOMAIN_HELP, formatter_class=fmt)
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    top.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = top.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("index", help="index on one cylinder", epilog=DOMAIN_HELP, formatter_class=fmt)
    _problem_flags(p)
    _cylinder_flags(p)
    p.add_argument("--dump-gram", metavar="PATH", help="write the Gram matrix and minimizer to PATH")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("classify", help="sweep, twist test and verdict", epilog=DOMAIN_HELP,
                       formatter_class=fmt)
    _problem_flags(p)
    p.add_argument("--samples", type=int, default=20, help="number of cylinders (default 20)")
    p.add_argument("--jobs", type=int, help="worker processes (default $L2INDEX_JOBS or 1)")
    p.add_argument("--twist", action="append", default=[], metavar="POLY",
                   help="extra twist polynomial g (repeatable)")
    p.add_argument("--twist-cylinders", type=int, default=4,
                   help="number of sampled cylinders used for the twist test (default 4)")
    p.add_argument("--out", metavar="PATH", help="write the full results JSON")
    p.add_argument("--csv", metavar="PATH", help="write per-cylinder rows as CSV")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("selftest", help="oracle and invariant checks")
    p.add_argument("--quick", action="store_true", help="fast subset (< 30 s)")
    p.add_argument("--only", help="comma-separated check names")
    p.add_argument("--inject-fault", choices=("volume",), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("oracle", help="independent reference computations")
    osub = p.add_subparsers(dest="oracle", required=True, metavar="oracle")
    q = osub.add_parser("radial", help="1-D integral for a radial profile on a disc at 0")
    q.add_argument("--profile", choices=sorted(oracle.RADIAL_PROFILES), required=True)
    q.add_argument("--r", type=float, default=1.0)
    for name, hlp in (("mc", "Monte Carlo energy of f = 1"),
                      ("extremal", "Monte Carlo energy of exp(h - h(a)) for phi = 2 Re h")):
        q = osub.add_parser(name, help=hlp, epilog=DOMAIN_HELP, formatter_class=fmt)
        _problem_flags(q, with_tol=False)
        _cylinder_flags(q)
        q.add_argument("--samples", type=int, default=10**6)
        if name == "extremal":
            q.add_argument("--h", required=True, help="holomorphic h with phi = 2 Re h")
    p.set_defaults(func=cmd_oracle)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"l2index: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, OSError, oracle.OracleError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
