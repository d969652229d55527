"""Branch-and-prune search for k-means over points with missing entries.

The search keeps a tuple of partial centers and the set ``R`` of points not
yet assigned.  Every call

1. assigns and drops the points whose domain fits inside every center's
   domain (their distances to all centers are final),
2. branches once per possible center update: a whole new center for every
   empty center, and one new coordinate for every missing coordinate of every
   partial center,
3. branches once more by pruning: among the points whose domain fits inside
   exactly the centers of some nonempty proper subset ``T`` of clusters, take
   the largest such group ``S_T``; if it holds at least ``|R|/(2^k-1)`` points,
   its closer half is assigned to the centers in ``T``,
4. returns the cheapest candidate.

The number of sampling branches along any path is bounded by ``k(Δ+1)`` and
every pruning branch removes a constant fraction of ``R``, so the tree size
depends on ``k``, ``Δ`` and ``ε`` but the work per level is linear in ``n``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import kernels
from .core import (
    Clustering,
    Dataset,
    MissingPoint,
    complete_centers,
    voronoi_assign,
)
from .sampling import SamplingParams, _initial_center_arrays, superset_sample_value

__all__ = [
    "SolveParams",
    "CenterTuple",
    "SearchStats",
    "SearchResult",
    "ResourceLimitError",
    "InvariantViolation",
    "partition_by_domains",
    "select_pruning_set",
    "k_means_search",
    "run_trials",
    "idealized_k_means",
    "call_bound_log",
]

_MASK64 = (1 << 64) - 1


class ResourceLimitError(RuntimeError):
    """A configured work budget (search calls, enumeration size) ran out."""


class InvariantViolation(AssertionError):
    pass


def _mix(key: int, branch: int) -> int:
    # splitmix64 finalizer over (key, branch); gives each branch its own stream
    z = (key ^ ((branch + 1) * 0x9E3779B97F4A7C15)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _seed32(key: int) -> int:
    return (key ^ (key >> 32)) & 0xFFFFFFFF


def _seq_sum(x: np.ndarray) -> float:
    # left-to-right, matching the compiled search bit for bit
    return float(np.cumsum(x)[-1]) if len(x) else 0.0


@dataclass(frozen=True)
class SolveParams:
    """User-facing knobs of a solve.

    ``alpha`` is always ``epsilon / 3``.  ``delta`` may only raise the
    dataset's observed missing count.  ``candidate_cost`` picks how the search
    compares candidates: ``"assigned"`` scores each candidate by the squared
    distances of the points it assigned; ``"partial"`` scores the bare partial
    centers with missing coordinates counting zero.  ``time_limit`` (seconds)
    bounds a whole :func:`run_trials` call; running past it is a
    :class:`ResourceLimitError`.
    """

    k: int
    epsilon: float
    repeats: int = 1
    seed: int = 0
    max_calls: int = 10**9
    delta: int | None = None
    retry_limit: int = 8
    candidate_cost: Literal["assigned", "partial"] = "assigned"
    check_invariants: bool = True
    time_limit: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.max_calls < 1:
            raise ValueError("max_calls must be positive")
        if self.candidate_cost not in ("assigned", "partial"):
            raise ValueError("candidate_cost must be 'assigned' or 'partial'")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")

    @property
    def alpha(self) -> float:
        return self.epsilon / 3.0

    def resolve_delta(self, data: Dataset) -> int:
        if self.delta is None:
            return data.delta
        if self.delta < data.delta:
            raise ValueError(
                f"delta override {self.delta} is below the observed {data.delta}"
            )
        if self.delta > data.d:
            raise ValueError("delta cannot exceed the dimension")
        return self.delta

    def sampling(self, data: Dataset) -> SamplingParams:
        return SamplingParams.derive(self.alpha, self.resolve_delta(data), self.retry_limit)


class CenterTuple:
    """``k`` partial centers with cached domain masks and packed domain words."""

    __slots__ = ("values", "mask", "words")

    def __init__(self, values, mask, words=None):
        self.values = np.asarray(values, dtype=np.float64)
        self.mask = np.asarray(mask, dtype=bool)
        self.values = np.where(self.mask, self.values, 0.0)
        self.words = kernels.pack_mask(self.mask) if words is None else words

    @classmethod
    def null(cls, k: int, d: int) -> "CenterTuple":
        return cls(np.zeros((k, d)), np.zeros((k, d), dtype=bool))

    @classmethod
    def from_points(cls, points) -> "CenterTuple":
        return cls(np.stack([p.values for p in points]), np.stack([p.mask for p in points]))

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def domains(self) -> list[frozenset[int]]:
        return [frozenset(np.flatnonzero(m).tolist()) for m in self.mask]

    @property
    def centers(self) -> list[MissingPoint]:
        return [MissingPoint(v, m) for v, m in zip(self.values, self.mask)]

    def replace_center(self, t: int, values, mask) -> "CenterTuple":
        vals = self.values.copy()
        msk = self.mask.copy()
        vals[t] = np.where(mask, values, 0.0)
        msk[t] = mask
        words = self.words.copy()
        words[t] = kernels.pack_mask(msk[t : t + 1])[0]
        return CenterTuple(vals, msk, words)

    def set_coordinate(self, t: int, j: int, value: float) -> "CenterTuple":
        vals = self.values.copy()
        msk = self.mask.copy()
        vals[t, j] = value
        msk[t, j] = True
        words = self.words.copy()
        words[t, j // 64] |= np.uint64(1) << np.uint64(j % 64)
        return CenterTuple(vals, msk, words)

    def potential(self, delta: int) -> int:
        """``Σ_t min(d - |I_t|, Δ + 1)``: an upper bound on updates left."""
        missing = self.d - self.mask.sum(axis=1)
        return int(np.minimum(missing, delta + 1).sum())

    def as_array(self) -> np.ndarray:
        return np.where(self.mask, self.values, np.nan)

    def __repr__(self):
        return f"CenterTuple(k={self.k}, d={self.d}, sizes={self.mask.sum(axis=1).tolist()})"


def _full(k: int) -> int:
    return (1 << k) - 1


def _codes(data: Dataset, rows, centers: CenterTuple) -> np.ndarray:
    return kernels.domain_codes(data.words, rows, centers.words)


def partition_by_domains(data: Dataset, centers: CenterTuple, rows=None) -> dict[int, np.ndarray]:
    """Split ``rows`` by the set of centers whose domain contains theirs.

    Keys are bitmasks over clusters (bit ``t`` set iff ``dom(x) ⊆ I_t``) and
    only nonempty groups are returned.  Points contained in every domain are
    not allowed here; the caller assigns them first.
    """
    rows = np.arange(data.n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    codes = _codes(data, rows, centers)
    if np.any(codes == _full(centers.k)):
        raise ValueError("rows contain points fully defined on every center's domain")
    return {int(c): rows[codes == c] for c in np.unique(codes)}


def _pick_pruning(codes: np.ndarray, k: int, n_remaining: int):
    counts = np.bincount(codes, minlength=1 << k)[: _full(k)]
    counts[0] = 0
    T = int(np.argmax(counts))
    if counts[T] > 0 and counts[T] * _full(k) >= n_remaining:
        return T
    return None


def select_pruning_set(data: Dataset, centers: CenterTuple, rows=None):
    """The largest ``S_T`` over nonempty proper ``T`` if it passes the size guard.

    Returns ``(T, rows_of_S_T)`` with ``T`` a cluster bitmask (ties to the
    smallest mask), or None when ``|S_T| < |R| / (2^k - 1)``.
    """
    rows = np.arange(data.n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    codes = _codes(data, rows, centers)
    if np.any(codes == _full(centers.k)):
        raise ValueError("rows contain points fully defined on every center's domain")
    T = _pick_pruning(codes, centers.k, len(rows))
    if T is None:
        return None
    return T, rows[codes == T]


def call_bound_log(k: int, delta0: int) -> float:
    """Natural log of ``(2δ(2^k-1))^(2δ+1) · (1 + 1/(2^(k+1)-3))^(δ²)``."""
    if delta0 == 0:
        return 0.0
    return (2 * delta0 + 1) * math.log(2 * delta0 * _full(k)) + delta0**2 * math.log1p(
        1.0 / (2 ** (k + 1) - 3)
    )


@dataclass
class SearchStats:
    """Counters and invariant bookkeeping for one search."""

    calls: int = 0
    sampling_branches: int = 0
    pruning_branches: int = 0
    max_sampling_on_path: int = 0
    max_pruning_on_path: int = 0
    nodes_checked: int = 0
    min_prune_margin: int | None = None
    violations: list[str] = field(default_factory=list)
    root_candidate_costs: list[float] = field(default_factory=list)


@dataclass
class SearchResult:
    """Centers returned by the search plus the assignment it made on the way."""

    centers: CenterTuple
    assignment: np.ndarray
    cost: float
    stats: SearchStats


class _Chunk:
    __slots__ = ("rows", "labels", "d2", "next")

    def __init__(self, rows, labels, d2, nxt):
        self.rows = rows
        self.labels = labels
        self.d2 = d2
        self.next = nxt


class _Search:
    def __init__(self, data: Dataset, k: int, sampling: SamplingParams, delta: int, params: SolveParams):
        self.data = data
        self.k = k
        self.full = _full(k)
        self.sampling = sampling
        self.delta = delta
        self.max_calls = params.max_calls
        self.partial_costs = params.candidate_cost == "partial"
        self.check = params.check_invariants
        self.all_allowed = np.ones(k, dtype=bool)
        self.max_sampling = k * (delta + 1)
        n = max(data.n, 1)
        shrink = 1.0 - 1.0 / (2 ** (k + 1) - 2)
        self.max_pruning = 1 + math.log(n) / -math.log(shrink)
        self.stats = SearchStats()
        self.rng = np.random.RandomState(0)
        self.deadline = None

    def _violation(self, msg: str):
        self.stats.violations.append(msg)
        raise InvariantViolation(msg)

    def _check_node(self, centers: CenterTuple, n_sampling: int, n_pruning: int):
        d = self.data.d
        sizes = centers.mask.sum(axis=1)
        bad = (sizes != 0) & (sizes < d - self.delta)
        if bad.any():
            self._violation(f"center domain sizes {sizes.tolist()} break |I_t| in {{0}} ∪ [d-Δ, d]")
        if n_sampling > self.max_sampling:
            self._violation(f"{n_sampling} sampling branches on one path > k(Δ+1)")
        if n_pruning > self.max_pruning:
            self._violation(f"{n_pruning} pruning branches on one path exceed the shrink bound")
        self.stats.nodes_checked += 1

    def visit(self, centers: CenterTuple, R: np.ndarray, key: int, n_sampling: int, n_pruning: int, root=False):
        stats = self.stats
        stats.calls += 1
        if stats.calls > self.max_calls:
            raise ResourceLimitError(f"search exceeded max_calls={self.max_calls}")
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise ResourceLimitError("search ran past the time limit")
        if n_sampling > stats.max_sampling_on_path:
            stats.max_sampling_on_path = n_sampling
        if n_pruning > stats.max_pruning_on_path:
            stats.max_pruning_on_path = n_pruning
        if self.check:
            self._check_node(centers, n_sampling, n_pruning)

        data = self.data
        codes = kernels.domain_codes(data.words, R, centers.words)
        done = codes == self.full
        chunk = None
        own_cost = 0.0
        if done.any():
            gone = R[done]
            d2, lab = kernels.nearest_center(
                data.values, data.mask, gone, centers.values, centers.mask, self.all_allowed
            )
            chunk = _Chunk(gone, lab, d2, None)
            own_cost = _seq_sum(d2)
            keep = ~done
            R = R[keep]
            codes = codes[keep]
        if len(R) == 0:
            return centers, own_cost, chunk

        candidates = []
        branch = 0
        potential = centers.potential(self.delta) if self.check else 0
        for t in range(self.k):
            row_mask = centers.mask[t]
            if not row_mask.any():
                child_key = _mix(key, branch)
                self.rng.seed(_seed32(child_key))
                vals, dom = _initial_center_arrays(data, R, self.sampling, self.rng)
                child = centers.replace_center(t, vals, dom)
                candidates.append(self._sample_branch(child, potential, R, child_key, n_sampling, n_pruning))
                branch += 1
            elif not row_mask.all():
                for j in np.flatnonzero(~row_mask):
                    child_key = _mix(key, branch)
                    self.rng.seed(_seed32(child_key))
                    value = superset_sample_value(data, int(j), self.sampling, self.rng, rows=R)
                    child = centers.set_coordinate(t, int(j), value)
                    candidates.append(self._sample_branch(child, potential, R, child_key, n_sampling, n_pruning))
                    branch += 1

        T = _pick_pruning(codes, self.k, len(R))
        if T is not None:
            candidates.append(self._prune_branch(centers, R, codes, T, _mix(key, branch), n_sampling, n_pruning))

        if not candidates:
            raise RuntimeError("search node produced no candidates")  # unreachable: R empties once all centers are complete
        if self.partial_costs:
            scores = [self._partial_cost(R, c[0]) for c in candidates]
        else:
            scores = [c[1] for c in candidates]
        best = int(np.argmin(scores))
        if root:
            stats.root_candidate_costs = [float(s) for s in scores]
        b_centers, b_cost, b_chunk = candidates[best]
        if chunk is not None:
            chunk.next = b_chunk
            b_chunk = chunk
        return b_centers, b_cost + own_cost, b_chunk

    def _sample_branch(self, child, potential, R, key, n_sampling, n_pruning):
        self.stats.sampling_branches += 1
        if self.check and child.potential(self.delta) > potential - 1:
            self._violation("sampling branch did not lower the potential")
        return self.visit(child, R, key, n_sampling + 1, n_pruning)

    def _prune_branch(self, centers, R, codes, T, key, n_sampling, n_pruning):
        self.stats.pruning_branches += 1
        data = self.data
        pos = np.flatnonzero(codes == T)
        S = R[pos]
        allowed = np.array([(T >> t) & 1 == 1 for t in range(self.k)])
        d2, lab = kernels.nearest_center(data.values, data.mask, S, centers.values, centers.mask, allowed)
        order = np.argsort(d2, kind="stable")[: (len(S) + 1) // 2]
        if self.check:
            need = -(-len(R) // (2 * self.full))
            margin = len(order) - max(1, need)
            if margin < 0:
                self._violation(f"pruning removed {len(order)} < {need} points")
            if self.stats.min_prune_margin is None or margin < self.stats.min_prune_margin:
                self.stats.min_prune_margin = margin
        taken = np.zeros(len(R), dtype=bool)
        taken[pos[order]] = True
        sub_centers, sub_cost, sub_chunk = self.visit(centers, R[~taken], key, n_sampling, n_pruning + 1)
        chunk = _Chunk(S[order], lab[order], d2[order], sub_chunk)
        return sub_centers, sub_cost + _seq_sum(d2[order]), chunk

    def _partial_cost(self, R, centers: CenterTuple) -> float:
        d2, _ = kernels.nearest_center(
            self.data.values, self.data.mask, R, centers.values, centers.mask, self.all_allowed
        )
        return _seq_sum(d2)


def _flatten(chunk, n: int):
    assignment = np.full(n, -1, dtype=np.int64)
    while chunk is not None:
        assignment[chunk.rows] = chunk.labels
        chunk = chunk.next
    return assignment


_ABORT_MESSAGES = {
    2: "center domain sizes break |I_t| in {0} ∪ [d-Δ, d]",
    3: "more than k(Δ+1) sampling branches on one path",
    4: "pruning branches on one path exceed the shrink bound",
    5: "sampling branch did not lower the potential",
    6: "pruning removed fewer points than the size guard promises",
    7: "search went deeper than the sampling and pruning bounds allow",
}


def _compiled_search(data, params, sampling, delta, centers, rows, key, check):
    from .kernels import _numba_search as ns

    k = params.k
    ip = np.zeros(ns.N_IP, dtype=np.int64)
    ip[ns.IP_K] = k
    ip[ns.IP_DELTA] = delta
    ip[ns.IP_M] = sampling.m
    ip[ns.IP_LAM] = sampling.lambda_ceil or 0
    ip[ns.IP_RETRY] = sampling.retry_limit
    ip[ns.IP_MAX_CALLS] = min(params.max_calls, 2**62)
    ip[ns.IP_CHECK] = int(check)
    ip[ns.IP_PARTIAL] = int(params.candidate_cost == "partial")
    ip[ns.IP_MAX_SAMPLING] = k * (delta + 1)
    shrink = 1.0 - 1.0 / (2 ** (k + 1) - 2)
    max_pruning = 1 + math.log(max(data.n, 1)) / -math.log(shrink)
    st = np.zeros(ns.N_STATS, dtype=np.int64)
    st[ns.ST_MIN_MARGIN] = ns.NO_MARGIN
    root_costs = np.zeros(k * data.d + 1)
    cv, cm, cost, labels = ns.search(
        data.values, data.mask, data.words, rows,
        centers.values, centers.mask, centers.words,
        np.uint64(key), ip, max_pruning, st, root_costs,
    )
    stats = SearchStats(
        calls=int(st[ns.ST_CALLS]),
        sampling_branches=int(st[ns.ST_SAMPLING]),
        pruning_branches=int(st[ns.ST_PRUNING]),
        max_sampling_on_path=int(st[ns.ST_MAX_SAMPLING]),
        max_pruning_on_path=int(st[ns.ST_MAX_PRUNING]),
        nodes_checked=int(st[ns.ST_NODES]),
        min_prune_margin=None if st[ns.ST_MIN_MARGIN] == ns.NO_MARGIN else int(st[ns.ST_MIN_MARGIN]),
        root_candidate_costs=root_costs[: st[ns.ST_ROOT_N]].tolist(),
    )
    code = int(st[ns.ST_ABORT])
    if code == ns.ABORT_CALLS:
        raise ResourceLimitError(f"search exceeded max_calls={params.max_calls}")
    if code:
        stats.violations.append(_ABORT_MESSAGES[code])
        raise InvariantViolation(_ABORT_MESSAGES[code])
    assignment = np.full(data.n, -1, dtype=np.int64)
    assignment[rows] = labels
    return CenterTuple(cv, cm), assignment, float(cost), stats


def k_means_search(
    data: Dataset,
    params: SolveParams,
    centers: CenterTuple | None = None,
    rows=None,
    seed: int | None = None,
    deadline: float | None = None,
) -> SearchResult:
    """Run one search from ``centers`` (null centers by default) over ``rows``.

    ``seed`` keys the per-branch random streams; it defaults to
    ``params.seed``.  Raises :class:`ResourceLimitError` past
    ``params.max_calls`` calls rather than returning a truncated result.
    With numba available the recursion runs compiled; both backends walk the
    same tree and return the same result.  ``deadline`` (a
    ``time.perf_counter`` value) is only honored by the numpy backend, which
    can stop mid-search.
    """
    delta = params.resolve_delta(data)
    sampling = SamplingParams.derive(params.alpha, delta, params.retry_limit)
    if centers is None:
        centers = CenterTuple.null(params.k, data.d)
    if centers.k != params.k or centers.d != data.d:
        raise ValueError("centers do not match k or the data dimension")
    rows = np.arange(data.n, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    key = (params.seed if seed is None else seed) & _MASK64
    check = params.check_invariants
    if kernels.BACKEND == "numba":
        out_centers, assignment, cost, stats = _compiled_search(
            data, params, sampling, delta, centers, rows, key, check
        )
    else:
        search = _Search(data, params.k, sampling, delta, params)
        search.deadline = deadline
        out_centers, cost, chunk = search.visit(centers, rows, key, 0, 0, root=True)
        assignment, stats = _flatten(chunk, data.n), search.stats
    if check and math.log(stats.calls) > call_bound_log(params.k, params.k * (delta + 1)) + 1e-12:
        msg = f"{stats.calls} calls exceed the recursion-count bound"
        stats.violations.append(msg)
        raise InvariantViolation(msg)
    return SearchResult(out_centers, assignment, cost, stats)


def run_trials(data: Dataset, params: SolveParams) -> Clustering:
    """Best of ``params.repeats`` independent searches, by final Voronoi cost.

    Each trial's partial centers are completed (missing coordinates filled by
    means of the points assigned to them, see :func:`complete_centers`) and
    the whole dataset is re-assigned to the nearest completed center.
    """
    if data.n < 1:
        raise ValueError("empty dataset")
    if params.k > data.n:
        raise ValueError(f"k={params.k} exceeds the number of points n={data.n}")
    deadline = None if params.time_limit is None else time.perf_counter() + params.time_limit
    base = params.seed & _MASK64
    best = None
    trials = []
    calls = 0
    for trial in range(params.repeats):
        if deadline is not None and time.perf_counter() > deadline:
            raise ResourceLimitError(
                f"time limit of {params.time_limit}s reached after {trial} of {params.repeats} trials"
            )
        result = k_means_search(data, params, seed=_mix(base, trial), deadline=deadline)
        calls += result.stats.calls
        if params.candidate_cost == "partial":
            seeded = voronoi_assign(data, result.centers).assignment
        else:
            seeded = result.assignment
        completed = complete_centers(result.centers, data, seeded)
        clustering = voronoi_assign(data, completed)
        trials.append(clustering.cost)
        if best is None or clustering.cost < best[0].cost:
            best = (clustering, result)
    if deadline is not None and time.perf_counter() > deadline:
        raise ResourceLimitError(f"time limit of {params.time_limit}s exceeded")
    clustering, result = best
    clustering.info = {
        "trials": trials,
        "calls": calls,
        "search_cost": result.cost,
        "stats": result.stats,
    }
    return clustering


def idealized_k_means(
    data: Dataset,
    ground_truth,
    params: SolveParams,
    rng: np.random.Generator,
    sample_from: Literal["cluster", "remaining"] = "cluster",
) -> Clustering:
    """Single-path variant steered by a counting oracle built from known labels.

    Each phase picks the cluster ``t`` with the most remaining points defined
    somewhere outside ``I_t``.  If that count reaches ``c|R|`` it samples a
    new center (empty ``I_t``) or the best missing coordinate; otherwise it
    prunes the closer half of the largest ``S_T``.  With
    ``sample_from="cluster"`` the estimators draw from the remaining points of
    cluster ``t`` only, i.e. each sampling step behaves as if its sample had
    landed in the right cluster.

    ``info`` records every phase, and ``dichotomy_failures`` counts phases in
    which neither the sampling nor the pruning condition held.
    """
    labels = np.asarray(ground_truth, dtype=np.int64)
    k = params.k
    if labels.shape != (data.n,) or labels.min() < 0 or labels.max() >= k:
        raise ValueError("ground truth must label every point with a cluster in [0, k)")
    if sample_from not in ("cluster", "remaining"):
        raise ValueError("sample_from must be 'cluster' or 'remaining'")
    delta = params.resolve_delta(data)
    sampling = SamplingParams.derive(params.alpha, delta, params.retry_limit)
    c = params.alpha / (8 * 2**k * k**2 * (delta + 1) ** 2)
    full = _full(k)
    d = data.d
    centers = CenterTuple.null(k, d)
    assignment = np.full(data.n, -1, dtype=np.int64)
    all_allowed = np.ones(k, dtype=bool)
    R = np.arange(data.n, dtype=np.int64)
    phases = []
    failures = 0
    sampling_phases = 0

    def assign_settled(R):
        codes = kernels.domain_codes(data.words, R, centers.words)
        done = codes == full
        if done.any():
            _, lab = kernels.nearest_center(
                data.values, data.mask, R[done], centers.values, centers.mask, all_allowed
            )
            assignment[R[done]] = lab
        return R[~done]

    R = assign_settled(R)
    while len(R):
        outside = data.mask[R][:, None, :] & ~centers.mask[None, :, :]
        touches = outside.any(axis=2)  # (|R|, k): defined somewhere outside I_t
        own = labels[R]
        pd_counts = np.array([np.count_nonzero(touches[own == t, t]) for t in range(k)])
        t = int(np.argmax(pd_counts))
        codes = kernels.domain_codes(data.words, R, centers.words)
        inside_T = np.zeros(full, dtype=np.int64)
        for T in range(1, full):
            members = [s for s in range(k) if (T >> s) & 1]
            inside_T[T] = np.count_nonzero((codes == T) & np.isin(own, members))
        sampling_ok = pd_counts[t] >= c * len(R)
        pruning_ok = inside_T.max() >= c * len(R)
        if not (sampling_ok or pruning_ok):
            failures += 1
        if sampling_ok:
            pool = R[own == t] if sample_from == "cluster" else R
            phase_rng = rng
            if not centers.mask[t].any():
                vals, dom = _initial_center_arrays(data, pool, sampling, phase_rng)
                centers = centers.replace_center(t, vals, dom)
                coord = None
            else:
                missing = np.flatnonzero(~centers.mask[t])
                in_cluster = R[own == t]
                per_j = data.mask[in_cluster][:, missing].sum(axis=0)
                coord = int(missing[int(np.argmax(per_j))])
                value = superset_sample_value(data, coord, sampling, phase_rng, rows=pool)
                centers = centers.set_coordinate(t, coord, value)
            sizes = centers.mask.sum(axis=1)
            if np.any((sizes != 0) & (sizes < d - delta)):
                raise InvariantViolation(f"center domain sizes {sizes.tolist()} after sampling")
            sampling_phases += 1
            before = len(R)
            R = assign_settled(R)
            phases.append({"kind": "sampling", "t": t, "coord": coord, "remaining": before, "settled": before - len(R)})
        else:
            counts = np.bincount(codes, minlength=1 << k)[:full]
            counts[0] = 0
            T = int(np.argmax(counts))
            pos = np.flatnonzero(codes == T)
            S = R[pos]
            allowed = np.array([(T >> s) & 1 == 1 for s in range(k)])
            d2, lab = kernels.nearest_center(data.values, data.mask, S, centers.values, centers.mask, allowed)
            order = np.argsort(d2, kind="stable")[: (len(S) + 1) // 2]
            if len(order) == 0:
                raise InvariantViolation("no phase can make progress")
            assignment[S[order]] = lab[order]
            taken = np.zeros(len(R), dtype=bool)
            taken[pos[order]] = True
            phases.append({"kind": "pruning", "T": T, "remaining": len(R), "removed": len(order)})
            R = R[~taken]

    completed = complete_centers(centers, data, assignment)
    clustering = Clustering(completed, assignment, 0.0)
    clustering.cost = clustering.recompute_cost(data)
    clustering.info = {
        "phases": phases,
        "sampling_phases": sampling_phases,
        "dichotomy_failures": failures,
        "c": c,
        "partial_centers": centers,
    }
    return clustering
