"""Ground truth for small instances, and a Lloyd-style baseline.

Since the cost of a fixed cluster is minimized by its centroid, the optimum
over all partitions is an exact k-means optimum.  :func:`exact_k_means`
enumerates partitions up to relabeling, so it only scales to a dozen or so
points.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .core import (
    Clustering,
    Dataset,
    MissingPoint,
    complete_centers,
    cost_on,
    centroid,
    voronoi_assign,
)
from .solver import ResourceLimitError

__all__ = ["ExactResult", "exact_k_means", "lloyd_baseline", "count_labelings"]

DEFAULT_BUDGET = 10**7


@dataclass
class ExactResult:
    opt_cost: float
    partition: np.ndarray
    centers: list[MissingPoint]


@lru_cache(maxsize=None)
def _stirling2(n: int, j: int) -> int:
    if n == j:
        return 1
    if j == 0 or j > n:
        return 0
    return j * _stirling2(n - 1, j) + _stirling2(n - 1, j - 1)


def count_labelings(n: int, k: int) -> int:
    """Number of partitions of ``n`` points into at most ``k`` blocks."""
    return sum(_stirling2(n, j) for j in range(1, min(n, k) + 1))


def exact_k_means(data: Dataset, k: int, budget: int = DEFAULT_BUDGET) -> ExactResult:
    """Minimum-cost k-clustering by exhaustive enumeration.

    Labelings are enumerated in canonical form (each new label is the next
    unused one), so every partition into at most ``k`` clusters is scored
    once.  Empty clusters are allowed and cost nothing.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if data.n < k:
        raise ValueError(f"need at least k={k} points, got {data.n}")
    total = count_labelings(data.n, k)
    if total > budget:
        raise ResourceLimitError(f"{total} partitions exceed the enumeration budget {budget}")
    _, labels = kernels.enumerate_partitions(data.values, data.mask, k)
    labels = np.asarray(labels, dtype=np.int64)
    centers = []
    cost = 0.0
    for t in range(k):
        rows = np.flatnonzero(labels == t)
        if len(rows) == 0:
            centers.append(MissingPoint.null(data.d))
            continue
        c = centroid(data, rows)
        centers.append(c)
        cost += cost_on(data, c, rows=rows)
    return ExactResult(opt_cost=cost, partition=labels, centers=centers)


def _global_means(data: Dataset) -> np.ndarray:
    counts = data.mask.sum(axis=0)
    return np.where(counts > 0, data.values.sum(axis=0) / np.maximum(counts, 1), 0.0)


def lloyd_baseline(
    data: Dataset,
    k: int,
    iterations: int = 100,
    rng: np.random.Generator | None = None,
    init=None,
) -> Clustering:
    """Alternate nearest-center assignment and per-cluster means.

    Seeds are ``k`` distinct random points with missing coordinates set to the
    global coordinate means, unless complete ``init`` centers are given.
    Stops after ``iterations`` rounds or when the assignment stops changing.
    ``info["history"]`` holds the cost after seeding and after every round.
    """
    if k < 1 or k > data.n:
        raise ValueError("need 1 <= k <= n")
    if init is None:
        rng = np.random.default_rng() if rng is None else rng
        seeds = rng.choice(data.n, size=k, replace=False)
        centers = np.where(data.mask[seeds], data.values[seeds], _global_means(data)[None, :])
    else:
        centers = np.asarray(init, dtype=np.float64)
        if centers.shape != (k, data.d) or np.isnan(centers).any():
            raise ValueError("init must be k complete centers")
    current = voronoi_assign(data, centers)
    history = [current.cost]
    rounds = 0
    for _ in range(iterations):
        counts = np.bincount(current.assignment, minlength=k)
        updated = complete_centers(np.full((k, data.d), np.nan), data, current.assignment)
        # an emptied cluster keeps its previous center
        updated[counts == 0] = current.centers[counts == 0]
        nxt = voronoi_assign(data, updated)
        rounds += 1
        history.append(nxt.cost)
        stable = np.array_equal(nxt.assignment, current.assignment)
        current = nxt
        if stable:
            break
    current.info = {"history": history, "rounds": rounds}
    return current
