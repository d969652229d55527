"""Points with missing coordinates and the basic calculus over them.

A missing entry is written ``None`` (or NaN) on input.  Internally every point
set stores a dense ``values`` array with 0.0 under missing entries plus a
boolean ``mask`` of defined coordinates; values under the mask are never read.
Coordinate and cluster indices are 0-based throughout the Python API.

Differences involving a missing entry count as zero, so the squared distance
between two points on an index set ``I`` only sums over coordinates in ``I``
defined in both points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels

__all__ = [
    "MissingPoint",
    "Dataset",
    "Clustering",
    "index_mask",
    "restrict_fd",
    "restrict_pd",
    "distance_on",
    "sq_distance_on",
    "cost_on",
    "centroid",
    "voronoi_assign",
    "complete_centers",
    "center_arrays",
]


def _parse_entries(entries) -> tuple[np.ndarray, np.ndarray]:
    raw = [np.nan if e is None else float(e) for e in entries]
    arr = np.asarray(raw, dtype=np.float64)
    mask = ~np.isnan(arr)
    return np.where(mask, arr, 0.0), mask


@dataclass(frozen=True, eq=False)
class MissingPoint:
    """A point of ``H^d``: real entries plus a mask of defined coordinates."""

    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        mask = np.asarray(self.mask, dtype=bool).ravel()
        if values.shape != mask.shape:
            raise ValueError("values and mask must have the same length")
        values = np.where(mask, values, 0.0)
        values.flags.writeable = False
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def of(cls, *entries) -> "MissingPoint":
        """``MissingPoint.of(1, None, 3)`` builds ``(1, ⊗, 3)``."""
        if len(entries) == 1 and not np.isscalar(entries[0]) and entries[0] is not None:
            entries = tuple(entries[0])
        values, mask = _parse_entries(entries)
        return cls(values, mask)

    @classmethod
    def null(cls, d: int) -> "MissingPoint":
        return cls(np.zeros(d), np.zeros(d, dtype=bool))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.mask).tolist())

    @property
    def is_null(self) -> bool:
        return not self.mask.any()

    @property
    def n_missing(self) -> int:
        return int(self.d - self.mask.sum())

    def to_list(self) -> list:
        return [float(v) if m else None for v, m in zip(self.values, self.mask)]

    def __eq__(self, other):
        if not isinstance(other, MissingPoint):
            return NotImplemented
        return bool(
            np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values[self.mask], other.values[other.mask])
        )

    def __hash__(self):
        return hash((self.mask.tobytes(), self.values[self.mask].tobytes()))

    def __repr__(self):
        body = ", ".join("⊗" if v is None else repr(v) for v in self.to_list())
        return f"MissingPoint({body})"


class Dataset:
    """An indexed collection of points sharing dimension ``d``.

    ``delta`` is the observed maximum number of missing coordinates per point.
    Row subsets (FD, PD, the solver's remaining set) are passed around as
    integer index arrays into the dataset rather than copied point sets.
    """

    def __init__(self, values, mask=None):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D array (n, d)")
        if mask is None:
            mask = ~np.isnan(values)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != values.shape:
            raise ValueError("mask shape must match values shape")
        self.values = np.ascontiguousarray(np.where(mask, values, 0.0))
        self.mask = np.ascontiguousarray(mask)
        self.words = kernels.pack_mask(self.mask)
        for arr in (self.values, self.mask, self.words):
            arr.flags.writeable = False
        self.n, self.d = values.shape
        self.delta = int((self.d - self.mask.sum(axis=1)).max()) if self.n else 0

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence]) -> "Dataset":
        """Build from nested sequences where ``None`` marks a missing entry."""
        rows = list(rows)
        if not rows:
            raise ValueError("empty dataset")
        parsed = [_parse_entries(r) for r in rows]
        d = parsed[0][0].shape[0]
        if any(p[0].shape[0] != d for p in parsed):
            raise ValueError("all points must have the same dimension")
        return cls(np.stack([p[0] for p in parsed]), np.stack([p[1] for p in parsed]))

    @classmethod
    def from_points(cls, points: Sequence[MissingPoint]) -> "Dataset":
        if not points:
            raise ValueError("empty dataset")
        d = points[0].d
        if any(p.d != d for p in points):
            raise ValueError("all points must have the same dimension")
        return cls(np.stack([p.values for p in points]), np.stack([p.mask for p in points]))

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> MissingPoint:
        return MissingPoint(self.values[i], self.mask[i])

    def __iter__(self):
        return (self[i] for i in range(self.n))

    def points(self) -> list[MissingPoint]:
        return list(self)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.values[rows], self.mask[rows])

    def as_nan_array(self) -> np.ndarray:
        return np.where(self.mask, self.values, np.nan)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return bool(
            np.array_equal(self.mask, other.mask)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"Dataset(n={self.n}, d={self.d}, delta={self.delta})"


@dataclass
class Clustering:
    """``k`` centers, a point-to-cluster assignment and its total cost.

    ``centers`` is a ``(k, d)`` array; NaN marks a coordinate left undefined
    (only when assigning against partial centers).
    """

    centers: np.ndarray
    assignment: np.ndarray
    cost: float
    info: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    def recompute_cost(self, data: Dataset) -> float:
        cvals, cmask = center_arrays(self.centers, data.d)
        rows = np.arange(data.n, dtype=np.int64)
        total = 0.0
        for t in range(self.k):
            sel = rows[self.assignment == t]
            if len(sel):
                allowed = np.zeros(self.k, dtype=bool)
                allowed[t] = True
                d2, _ = kernels.nearest_center(
                    data.values, data.mask, sel, cvals, cmask, allowed
                )
                total += float(d2.sum())
        return total


def index_mask(I, d: int) -> np.ndarray:
    """Normalize an index set (iterable of ints or boolean mask) to a mask."""
    if isinstance(I, np.ndarray) and I.dtype == bool:
        if I.shape != (d,):
            raise ValueError(f"index mask must have length {d}")
        return I
    out = np.zeros(d, dtype=bool)
    idx = np.fromiter((int(i) for i in I), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise ValueError(f"coordinate index out of range [0, {d})")
    out[idx] = True
    return out


def _rows(data: Dataset, rows) -> np.ndarray:
    if rows is None:
        return np.arange(data.n, dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def restrict_fd(data: Dataset, I, rows=None) -> np.ndarray:
    """Rows of points fully defined on ``I`` (``dom(x) ⊆ I``), in order."""
    rows = _rows(data, rows)
    inside = ~np.any(data.mask[rows] & ~index_mask(I, data.d), axis=1)
    return rows[inside]


def restrict_pd(data: Dataset, I, rows=None) -> np.ndarray:
    """Rows of points partially defined on ``I`` (``dom(x) ∩ I ≠ ∅``), in order."""
    rows = _rows(data, rows)
    touch = np.any(data.mask[rows] & index_mask(I, data.d), axis=1)
    return rows[touch]


def _check_dims(x: MissingPoint, y: MissingPoint):
    if x.d != y.d:
        raise ValueError(f"dimension mismatch: {x.d} != {y.d}")


def sq_distance_on(x: MissingPoint, y: MissingPoint, I=None) -> float:
    _check_dims(x, y)
    both = x.mask & y.mask
    if I is not None:
        both = both & index_mask(I, x.d)
    diff = x.values - y.values
    return float(np.sum(diff[both] ** 2))


def distance_on(x: MissingPoint, y: MissingPoint, I=None) -> float:
    """Distance on ``I`` (all coordinates when ``I`` is None)."""
    return float(np.sqrt(sq_distance_on(x, y, I)))


def cost_on(data: Dataset, y: MissingPoint, I=None, rows=None) -> float:
    """Sum of squared distances on ``I`` from the selected points to ``y``."""
    if y.d != data.d:
        raise ValueError(f"dimension mismatch: {data.d} != {y.d}")
    rows = _rows(data, rows)
    if len(rows) == 0:
        return 0.0
    cmask = y.mask if I is None else (y.mask & index_mask(I, data.d))
    d2, _ = kernels.nearest_center(
        data.values,
        data.mask,
        rows,
        y.values[None, :],
        cmask[None, :],
        np.ones(1, dtype=bool),
    )
    return float(d2.sum())


def centroid(data: Dataset, rows=None) -> MissingPoint:
    """Per-coordinate mean over the points defined there; ⊗ where none are."""
    rows = _rows(data, rows)
    if len(rows) == 0:
        raise ValueError("centroid of an empty point set")
    m = data.mask[rows]
    counts = m.sum(axis=0)
    sums = data.values[rows].sum(axis=0)
    defined = counts > 0
    return MissingPoint(np.where(defined, sums / np.maximum(counts, 1), 0.0), defined)


def center_arrays(centers, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Coerce centers to ``(values, mask)`` arrays of shape ``(k, d)``.

    Accepts a sequence of ``MissingPoint``, anything with ``values``/``mask``
    attributes (``CenterTuple``), or a float array with NaN for ⊗.
    """
    if hasattr(centers, "values") and hasattr(centers, "mask"):
        vals = np.asarray(centers.values, dtype=np.float64)
        mask = np.asarray(centers.mask, dtype=bool)
    elif len(centers) and isinstance(centers[0], MissingPoint):
        vals = np.stack([c.values for c in centers])
        mask = np.stack([c.mask for c in centers])
    else:
        arr = np.atleast_2d(np.asarray(centers, dtype=np.float64))
        mask = ~np.isnan(arr)
        vals = np.where(mask, arr, 0.0)
    if vals.ndim != 2 or vals.shape[1] != d:
        raise ValueError(f"centers must have dimension {d}")
    return np.ascontiguousarray(vals), np.ascontiguousarray(mask)


def voronoi_assign(data: Dataset, centers, rows=None) -> Clustering:
    """Assign every point to its nearest center (lowest index on ties).

    Null points have distance 0 to every center and land in cluster 0.
    """
    cvals, cmask = center_arrays(centers, data.d)
    k = cvals.shape[0]
    if k == 0:
        raise ValueError("need at least one center")
    rows = _rows(data, rows)
    d2, arg = kernels.nearest_center(
        data.values, data.mask, rows, cvals, cmask, np.ones(k, dtype=bool)
    )
    return Clustering(
        centers=np.where(cmask, cvals, np.nan),
        assignment=arg,
        cost=float(d2.sum()),
    )


def complete_centers(centers, data: Dataset, assignment) -> np.ndarray:
    """Fill ⊗ center coordinates; defined coordinates are left untouched.

    Coordinate ``i`` of center ``t`` becomes the mean of ``x_i`` over points
    assigned to ``t`` that are defined at ``i``; failing that, the mean over
    all points defined at ``i``; failing that, 0.
    """
    cvals, cmask = center_arrays(centers, data.d)
    k = cvals.shape[0]
    assignment = np.asarray(assignment, dtype=np.int64)
    sums, counts = kernels.cluster_sums(data.values, data.mask, assignment, k)
    gcount = data.mask.sum(axis=0)
    gmean = np.where(gcount > 0, data.values.sum(axis=0) / np.maximum(gcount, 1), 0.0)
    local = np.where(counts > 0, sums / np.maximum(counts, 1.0), gmean[None, :])
    return np.where(cmask, cvals, local)
