from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..core import Dataset


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``1..vertex_count``.

    Edge order matters: edge ``i`` becomes coordinate ``i`` of the clustering
    instance, and its first endpoint gets ``-1`` there, the second ``+1``.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.vertex_count < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.vertex_count and 1 <= v <= self.vertex_count):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 1..{self.vertex_count}")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return deg

    def is_colorable(self, k: int) -> bool:
        """Brute-force check; only meant for tiny graphs."""
        for colors in itertools.product(range(k), repeat=self.vertex_count):
            if all(colors[u - 1] != colors[v - 1] for u, v in self.edges):
                return True
        return False


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i % n + 1) for i in range(1, n + 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple(itertools.combinations(range(1, n + 1), 2)))


def graph_to_instance(g: Graph) -> Dataset:
    """One point per vertex in ``m`` dimensions, one coordinate per edge.

    A proper k-coloring of ``g`` gives a k-clustering of cost 0: no cluster
    then holds both ``-1`` and ``+1`` in the same coordinate.
    """
    if g.m < 1:
        raise ValueError("graph needs at least one edge")
    values = np.zeros((g.vertex_count, g.m))
    mask = np.zeros((g.vertex_count, g.m), dtype=bool)
    for i, (u, v) in enumerate(g.edges):
        values[u - 1, i] = -1.0
        values[v - 1, i] = 1.0
        mask[u - 1, i] = mask[v - 1, i] = True
    return Dataset(values, mask)


def _place_centers(k, d, separation, rng, tries=1000):
    if k == 1 or separation <= 0:
        return rng.normal(size=(k, d)) * max(separation, 1.0)
    # spread scales with k so rejection sampling succeeds quickly
    scale = separation * max(1.0, k ** (1.0 / d)) * 2.0
    for _ in range(tries):
        centers = rng.uniform(-scale, scale, size=(k, d))
        gaps = np.linalg.norm(centers[:, None, :] - centers[None, :, :], axis=2)
        if gaps[np.triu_indices(k, 1)].min() >= separation:
            return centers
    raise ValueError("could not place centers with the requested separation")


def gen_mixture(
    k: int,
    n: int,
    d: int,
    Delta: int,
    separation: float = 10.0,
    noise_sigma: float = 1.0,
    missing_rate: float = 0.5,
    seed: int | None = None,
) -> tuple[Dataset, np.ndarray]:
    """Gaussian mixture with at most ``Delta`` missing coordinates per point.

    Cluster sizes differ by at most one.  Each point independently, with
    probability ``missing_rate``, loses a uniformly chosen set of between 1
    and ``Delta`` coordinates.  Returns the dataset and the true labels.
    """
    if k < 1 or n < k:
        raise ValueError("need 1 <= k <= n")
    if d < 1 or Delta < 0 or Delta > d:
        raise ValueError("need d >= 1 and 0 <= Delta <= d")
    if not 0.0 <= missing_rate <= 1.0:
        raise ValueError("missing_rate must lie in [0, 1]")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = np.random.default_rng(seed)
    centers = _place_centers(k, d, separation, rng)
    labels = rng.permutation(np.arange(n) % k)
    values = centers[labels] + rng.normal(scale=noise_sigma, size=(n, d)) if noise_sigma > 0 else centers[labels].copy()
    mask = np.ones((n, d), dtype=bool)
    if Delta > 0 and missing_rate > 0:
        hit = np.flatnonzero(rng.random(n) < missing_rate)
        sizes = rng.integers(1, Delta + 1, size=len(hit))
        for p, s in zip(hit, sizes):
            mask[p, rng.choice(d, size=s, replace=False)] = False
    return Dataset(values, mask), labels
