"""``misskmeans`` command line.

Exit status is 0 on success, 2 on a usage error (bad flags, unreadable or
malformed input) and 3 when a work budget runs out.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from ..core import voronoi_assign
from ..oracle import DEFAULT_BUDGET, exact_k_means
from ..solver import ResourceLimitError, SolveParams, run_trials
from .bench import scaling_sweep
from .generators import gen_mixture, graph_to_instance
from .io import (
    DEFAULT_MISSING_TOKEN,
    clustering_to_json,
    dump_json,
    read_centers,
    read_csv,
    read_edges,
    write_csv,
)

log = logging.getLogger("misskmeans")

EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _cmd_solve(args):
    data = read_csv(args.input, args.missing_token)
    params = SolveParams(
        k=args.k,
        epsilon=args.epsilon,
        repeats=args.repeats,
        seed=args.seed,
        max_calls=args.max_calls,
        delta=args.delta,
        candidate_cost=args.candidate_cost,
    )
    log.info("solving n=%d d=%d delta=%d k=%d", data.n, data.d, data.delta, args.k)
    clustering = run_trials(data, params)
    out = clustering_to_json(
        clustering,
        seed=args.seed,
        params={
            "k": args.k,
            "epsilon": args.epsilon,
            "alpha": params.alpha,
            "repeats": args.repeats,
            "delta": params.resolve_delta(data),
            "max_calls": args.max_calls,
            "candidate_cost": args.candidate_cost,
        },
    )
    dump_json(out, args.output)


def _cmd_exact(args):
    data = read_csv(args.input, args.missing_token)
    result = exact_k_means(data, args.k, budget=args.budget)
    centers = [[None if not m else float(v) for v, m in zip(c.values, c.mask)] for c in result.centers]
    dump_json(
        {
            "centers": centers,
            "assignment": [int(a) for a in result.partition],
            "cost": result.opt_cost,
        },
        args.output,
    )


def _cmd_gen(args):
    if args.kind == "mixture":
        data, labels = gen_mixture(
            args.k, args.n, args.d, args.delta, args.separation, args.sigma, args.missing_rate, args.seed
        )
        if args.labels_out:
            np.savetxt(args.labels_out, labels, fmt="%d")
    else:
        data = graph_to_instance(read_edges(args.graph))
    write_csv(data, args.out, args.missing_token)


def _cmd_eval(args):
    data = read_csv(args.input, args.missing_token)
    centers = read_centers(args.centers)
    clustering = voronoi_assign(data, centers)
    dump_json({"cost": clustering.cost, "assignment": [int(a) for a in clustering.assignment]}, args.output)


def _cmd_bench(args):
    rows = scaling_sweep(
        args.sizes, args.k, args.d, args.delta, args.epsilon, args.runs, args.seed,
        separation=args.separation, missing_rate=args.missing_rate,
    )
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["n", "seconds"])
        for n, sec in rows:
            w.writerow([n, f"{sec:.6f}"])
    finally:
        if args.output:
            fh.close()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="misskmeans", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add_missing(sp):
        sp.add_argument("--missing-token", default=DEFAULT_MISSING_TOKEN)

    s = sub.add_parser("solve", help="approximate k-means of a CSV dataset")
    s.add_argument("--input", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--epsilon", type=float, default=1.0)
    s.add_argument("--repeats", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-calls", type=int, default=10**9)
    s.add_argument("--delta", type=int, default=None, help="raise the missing-count bound")
    s.add_argument("--candidate-cost", choices=["assigned", "partial"], default="assigned")
    s.add_argument("--output")
    add_missing(s)
    s.set_defaults(func=_cmd_solve)

    e = sub.add_parser("exact", help="brute-force optimum (tiny inputs only)")
    e.add_argument("--input", required=True)
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    e.add_argument("--output")
    add_missing(e)
    e.set_defaults(func=_cmd_exact)

    g = sub.add_parser("gen", help="write a generated instance as CSV")
    gsub = g.add_subparsers(dest="kind", required=True)
    gm = gsub.add_parser("mixture")
    gm.add_argument("--k", type=int, required=True)
    gm.add_argument("--n", type=int, required=True)
    gm.add_argument("--d", type=int, required=True)
    gm.add_argument("--delta", type=int, default=1)
    gm.add_argument("--separation", type=float, default=10.0)
    gm.add_argument("--sigma", type=float, default=1.0)
    gm.add_argument("--missing-rate", type=float, default=0.5)
    gm.add_argument("--seed", type=int, default=0)
    gm.add_argument("--labels-out")
    gm.add_argument("--out", required=True)
    add_missing(gm)
    gc = gsub.add_parser("coloring")
    gc.add_argument("--graph", required=True)
    gc.add_argument("--out", required=True)
    add_missing(gc)
    g.set_defaults(func=_cmd_gen)

    v = sub.add_parser("eval", help="cost of given centers on a dataset")
    v.add_argument("--input", required=True)
    v.add_argument("--centers", required=True, help="result JSON with a 'centers' key")
    v.add_argument("--output")
    add_missing(v)
    v.set_defaults(func=_cmd_eval)

    b = sub.add_parser("bench", help="wall time against n, as CSV")
    b.add_argument("--sizes", type=int, nargs="+", default=[10000, 20000, 40000])
    b.add_argument("--k", type=int, default=2)
    b.add_argument("--d", type=int, default=8)
    b.add_argument("--delta", type=int, default=1)
    b.add_argument("--epsilon", type=float, default=1.0)
    b.add_argument("--runs", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--separation", type=float, default=20.0)
    b.add_argument("--missing-rate", type=float, default=1.0)
    b.add_argument("--output")
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except ResourceLimitError as exc:
        print(f"misskmeans: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError) as exc:
        print(f"misskmeans: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
