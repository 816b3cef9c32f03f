"""Gram assembly: compiled core vs numpy fallback.

Usage: python3 benchmarks/bench_gram.py [--repeat 5] [--json]

Each case builds the quadrature rule and basis used by the index solver for
one (n, level, degree) and times ``gram`` from both backends on identical
inputs.  The best of ``--repeat`` runs is reported, along with the largest
entrywise difference between the two results.
"""
import argparse
import json
import sys
import time

import numpy as np

from l2index import _kernels
from l2index._kernels import _gram_py
from l2index.bergman import multi_indices
from l2index.quadrature import unit_cylinder_rule

CASES = [  # (n, level, degree)
    (1, 6, 12),
    (1, 12, 16),
    (2, 4, 8),
    (2, 6, 10),
    (3, 3, 5),
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def run(repeat):
    compiled = _kernels.gram if _kernels.BACKEND == "cython" else None
    rows = []
    rng = np.random.default_rng(0)
    for n, level, N in CASES:
        rule = unit_cylinder_rule(n, level)
        exps = multi_indices(n, N)
        omega = rule.weights * np.exp(-rng.random(len(rule)))
        t_py, G_py = best_of(lambda: _gram_py.gram(rule.nodes, omega, exps), repeat)
        row = {"n": n, "level": level, "degree": N, "nodes": len(rule), "basis": len(exps),
               "python_s": t_py}
        if compiled is not None:
            t_cy, G_cy = best_of(lambda: compiled(rule.nodes, omega, exps), repeat)
            row.update(cython_s=t_cy, speedup=t_py / t_cy,
                       max_abs_diff=float(np.max(np.abs(G_cy - G_py))))
        rows.append(row)
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)
    rows = run(args.repeat)
    if args.json:
        json.dump({"backend": _kernels.BACKEND, "rows": rows}, sys.stdout, indent=2)
        print()
        return
    print(f"active backend: {_kernels.BACKEND}")
    print(f"{'n':>2} {'lvl':>3} {'N':>3} {'nodes':>7} {'basis':>5} {'python':>9} {'cython':>9} "
          f"{'speedup':>7} {'max diff':>9}")
    for r in rows:
        cy = f"{r['cython_s']:9.4f} {r['speedup']:7.2f} {r['max_abs_diff']:9.1e}" if "cython_s" in r \
            else f"{'-':>9} {'-':>7} {'-':>9}"
        print(f"{r['n']:>2} {r['level']:>3} {r['degree']:>3} {r['nodes']:>7} {r['basis']:>5} "
              f"{r['python_s']:9.4f} {cy}")


if __name__ == "__main__":
    main()
