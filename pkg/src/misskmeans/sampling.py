"""Randomized center estimation from uniform samples.

Two estimators drive the search:

* :func:`superset_sample_value` estimates one coordinate of a cluster center
  from a constant-size sample, guessing the cluster's share of the sample by
  a uniformly random nonempty subset.
* :func:`initial_center_sample` builds a whole partial center whose domain
  copies the domain of a randomly drawn pivot point.

Both take an explicit random source (a ``numpy.random.Generator`` or
``RandomState``); with the same state and inputs they return the same value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, MissingPoint

__all__ = [
    "SamplingParams",
    "lambda_of",
    "superset_sample_value",
    "initial_center_sample",
]

DEFAULT_RETRY_LIMIT = 8


def lambda_of(alpha: float, delta: int) -> float:
    """``max((3/alpha)^(1/(2Δ)), (128Δ³)^(1/(2Δ)))``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if delta < 1:
        raise ValueError("lambda is only defined for delta >= 1")
    e = 1.0 / (2 * delta)
    return max((3.0 / alpha) ** e, (128.0 * delta**3) ** e)


@dataclass(frozen=True)
class SamplingParams:
    """Sample sizes shared by both estimators.

    ``m`` is the single-coordinate sample size; ``lambda_ceil`` is ``⌈8λ⌉``
    and is None for complete data (``delta == 0``), where whole centers are
    plain means of ``m`` uniform draws instead.
    """

    alpha: float
    m: int
    lambda_ceil: int | None
    delta: int
    retry_limit: int = DEFAULT_RETRY_LIMIT

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if self.retry_limit < 1:
            raise ValueError("retry_limit must be positive")
        if self.delta >= 1 and (self.lambda_ceil is None or self.lambda_ceil < 8):
            raise ValueError("lambda_ceil must be >= 8 when delta >= 1")

    @classmethod
    def derive(cls, alpha: float, delta: int, retry_limit: int = DEFAULT_RETRY_LIMIT):
        m = max(2, math.ceil(4.0 / alpha))
        lam = math.ceil(8.0 * lambda_of(alpha, delta)) if delta >= 1 else None
        return cls(alpha=alpha, m=m, lambda_ceil=lam, delta=delta, retry_limit=retry_limit)


def _check_rows(data: Dataset, rows) -> np.ndarray:
    rows = np.arange(data.n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    if len(rows) == 0:
        raise ValueError("cannot sample from an empty point set")
    return rows


# All randomness below goes through ``rng.random`` (uniform doubles) and every
# mean is a left-to-right sum.  The compiled search repeats exactly these draws
# and sums, so both backends produce identical trees for one seed.


def _pick(n: int, rng) -> int:
    return min(int(rng.random() * n), n - 1)


def _draw(rows: np.ndarray, size: int, rng) -> np.ndarray:
    n = len(rows)
    idx = (rng.random(size) * n).astype(np.int64)
    np.minimum(idx, n - 1, out=idx)
    return rows[idx]


def _seq_mean(x: np.ndarray) -> float:
    return float(np.cumsum(x)[-1] / len(x))


def superset_sample_value(
    data: Dataset, i: int, params: SamplingParams, rng, rows=None
) -> float:
    """One candidate value for coordinate ``i`` of some cluster's center.

    Draws ``m`` points with replacement, keeps a uniformly random nonempty
    subset of the draws, and averages the kept points defined at ``i``.
    Empty results are retried with fresh samples; after ``retry_limit``
    retries a random defined entry is returned, or 0.0 when no point is
    defined at ``i`` (then the value never contributes to any cost).

    ``rng`` is anything with a numpy-style ``random(size)`` method.
    """
    rows = _check_rows(data, rows)
    m = params.m
    for _ in range(params.retry_limit + 1):
        draws = _draw(rows, m, rng)
        keep = rng.random(m) < 0.5
        while not keep.any():
            keep = rng.random(m) < 0.5
        kept = draws[keep]
        kept = kept[data.mask[kept, i]]
        if len(kept):
            return _seq_mean(data.values[kept, i])
    defined = rows[data.mask[rows, i]]
    if len(defined) == 0:
        return 0.0
    return float(data.values[defined[_pick(len(defined), rng)], i])


def _sample_mean(data: Dataset, rows, size, rng):
    draws = _draw(rows, size, rng)
    counts = data.mask[draws].sum(axis=0)
    sums = np.cumsum(data.values[draws], axis=0)[-1]
    return np.where(counts > 0, sums / np.maximum(counts, 1), 0.0), counts > 0


def initial_center_sample(
    data: Dataset, params: SamplingParams, rng, rows=None
) -> MissingPoint:
    """A partial center whose domain equals the domain of a random pivot.

    Pick a pivot ``p`` uniformly; take the centroid of ``⌈8λ⌉`` uniform draws
    on ``dom(p)``; coordinates of ``dom(p)`` the draws leave undefined are
    filled from fresh samples of the same size, one per coordinate, falling
    back to samples from the points defined there after ``retry_limit``
    misses.  For complete data this is the mean of ``m`` uniform draws.
    """
    rows = _check_rows(data, rows)
    return MissingPoint(*_initial_center_arrays(data, rows, params, rng))


def _initial_center_arrays(data, rows, params, rng):
    if params.delta == 0:
        return _sample_mean(data, rows, params.m, rng)

    size = params.lambda_ceil
    pivot = rows[_pick(len(rows), rng)]
    dom_p = data.mask[pivot]
    vals, defined = _sample_mean(data, rows, size, rng)
    u = np.where(dom_p & defined, vals, 0.0)
    for j in np.flatnonzero(dom_p & ~defined):
        value = None
        for _ in range(params.retry_limit):
            draws = _draw(rows, size, rng)
            draws = draws[data.mask[draws, j]]
            if len(draws):
                value = _seq_mean(data.values[draws, j])
                break
        if value is None:
            # pivot itself is defined at j, so this pool is never empty
            pool = rows[data.mask[rows, j]]
            value = _seq_mean(data.values[_draw(pool, size, rng), j])
        u[j] = value
    return u, dom_p.copy()
