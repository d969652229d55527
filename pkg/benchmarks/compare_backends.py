#!/usr/bin/env python3
"""Time the numba kernels against the numpy fallback.

Kernel timings run in-process on both backend modules.  The full solve is
run twice in subprocesses, once with MISSKMEANS_DISABLE_NUMBA=1, since the
backend is fixed at import time.

    python3 benchmarks/compare_backends.py --n 20000 --d 8
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from misskmeans.harness import gen_mixture
from misskmeans.kernels import numba_backend, numpy_backend, pack_mask

SOLVE_SNIPPET = """
import json, sys, time
from misskmeans import SolveParams, run_trials, kernels
from misskmeans.harness import gen_mixture
n, d, k, reps = map(int, sys.argv[1:5])
data, _ = gen_mixture(k, n, d, 1, separation=20.0, missing_rate=1.0, seed=0)
run_trials(data.subset(range(min(n, 200))), SolveParams(k=k, epsilon=1.0, seed=0))  # warm-up
t0 = time.perf_counter()
c = run_trials(data, SolveParams(k=k, epsilon=1.0, repeats=reps, seed=0))
print(json.dumps({"backend": kernels.BACKEND, "seconds": time.perf_counter() - t0, "cost": c.cost}))
"""


def best_of(fn, runs):
    fn()
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_table(n, d, k, runs):
    data, _ = gen_mixture(k, n, d, 1, seed=1)
    rows = np.arange(n, dtype=np.int64)
    rng = np.random.default_rng(0)
    cmask = rng.random((k, d)) < 0.8
    cvals = rng.normal(size=(k, d))
    allowed = np.ones(k, dtype=bool)
    labels = rng.integers(0, k, size=n)
    words, cwords = pack_mask(data.mask), pack_mask(cmask)
    small, _ = gen_mixture(2, 11, 3, 1, seed=2)
    cases = {
        "domain_codes": lambda b: b.domain_codes(words, rows, cwords),
        "nearest_center": lambda b: b.nearest_center(data.values, data.mask, rows, cvals, cmask, allowed),
        "cluster_sums": lambda b: b.cluster_sums(data.values, data.mask, labels, k),
        "enumerate_partitions(n=11)": lambda b: b.enumerate_partitions(small.values, small.mask, 2),
    }
    out = []
    for name, call in cases.items():
        t_np = best_of(lambda: call(numpy_backend), runs)
        t_nb = best_of(lambda: call(numba_backend), runs) if numba_backend is not None else float("nan")
        out.append((name, t_np, t_nb))
    return out


def solve_pair(n, d, k, reps):
    results = {}
    for disable in ("0", "1"):
        env = dict(os.environ, MISSKMEANS_DISABLE_NUMBA=disable)
        proc = subprocess.run(
            [sys.executable, "-c", SOLVE_SNIPPET, str(n), str(d), str(k), str(reps)],
            env=env, capture_output=True, text=True, check=True,
        )
        r = json.loads(proc.stdout.strip().splitlines()[-1])
        results[r["backend"]] = r
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--d", type=int, default=8)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--json", action="store_true", help="machine-readable output")
    args = ap.parse_args()

    kernels = kernel_table(args.n, args.d, args.k, args.runs)
    solves = solve_pair(args.n, args.d, args.k, args.repeats)
    if args.json:
        print(json.dumps({
            "kernels": [{"name": n, "numpy": a, "numba": b} for n, a, b in kernels],
            "solve": solves,
        }, indent=2))
        return
    print(f"n={args.n} d={args.d} k={args.k}, best of {args.runs}")
    print(f"{'kernel':<28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, a, b in kernels:
        print(f"{name:<28}{a * 1e3:>12.3f}{b * 1e3:>12.3f}{a / b:>9.1f}x")
    print()
    for backend, r in sorted(solves.items()):
        print(f"solve [{backend:>5}]  {r['seconds']:.3f}s  cost {r['cost']:.6g}")
    if len(solves) == 2:
        same = solves["numba"]["cost"] == solves["numpy"]["cost"]
        print(f"speedup {solves['numpy']['seconds'] / solves['numba']['seconds']:.1f}x, identical cost: {same}")


if __name__ == "__main__":
    main()
