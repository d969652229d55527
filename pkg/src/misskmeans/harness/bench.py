from __future__ import annotations

import time

import numpy as np

from ..solver import SolveParams, run_trials
from .generators import gen_mixture


def scaling_sweep(
    sizes,
    k: int = 2,
    d: int = 8,
    Delta: int = 1,
    epsilon: float = 1.0,
    runs: int = 5,
    seed: int = 0,
    separation: float = 20.0,
    missing_rate: float = 1.0,
) -> list[tuple[int, float]]:
    """Mean wall time of a single-repeat solve for each ``n`` in ``sizes``.

    One mixture of ``max(sizes)`` points is generated and every size uses its
    first ``n`` points, so the sizes differ only in how many points they see.
    Each size is solved with solver seeds ``seed .. seed + runs - 1``.  The
    default ``missing_rate=1`` gives every point the same number of missing
    coordinates; with a mix of complete and incomplete points the search tree
    shape, and with it the time, swings a lot between seeds.

    A small warm-up solve runs first so JIT compilation is not timed.
    """
    sizes = sorted(int(n) for n in sizes)
    if not sizes or len(set(sizes)) != len(sizes):
        raise ValueError("sizes must be distinct and nonempty")
    if runs < 1:
        raise ValueError("runs must be positive")
    if sizes[0] < k:
        raise ValueError("every size must be at least k")
    warm, _ = gen_mixture(k, max(k, 64), d, Delta, separation, 1.0, missing_rate, seed)
    run_trials(warm, SolveParams(k=k, epsilon=epsilon, seed=seed))
    data, _ = gen_mixture(k, sizes[-1], d, Delta, separation, 1.0, missing_rate, seed)
    rows = []
    for n in sizes:
        part = data.subset(np.arange(n))
        times = []
        for r in range(runs):
            params = SolveParams(k=k, epsilon=epsilon, repeats=1, seed=seed + r)
            t0 = time.perf_counter()
            run_trials(part, params)
            times.append(time.perf_counter() - t0)
        rows.append((n, float(np.mean(times))))
    return rows
