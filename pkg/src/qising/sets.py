"""Finite unions of closed intervals, finite point sets and the Hausdorff metric."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

MERGE_TOL = 1e-9
POINT_TOL = 1e-10


def _as_interval_array(intervals) -> np.ndarray:
    arr = np.asarray(intervals, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2))
    arr = arr.reshape(-1, 2)
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("interval with lo > hi")
    if not np.all(np.isfinite(arr)):
        raise ValueError("interval endpoints must be finite")
    return arr


def merge_intervals(intervals, tol: float = MERGE_TOL) -> np.ndarray:
    """Sort intervals and merge any that overlap or come within ``tol``."""
    arr = _as_interval_array(intervals)
    if len(arr) == 0:
        return arr
    arr = arr[np.argsort(arr[:, 0], kind="stable")]
    # a new run starts wherever the left end clears everything before it
    reach = np.maximum.accumulate(arr[:, 1])
    starts = np.ones(len(arr), dtype=bool)
    starts[1:] = arr[1:, 0] > reach[:-1] + tol
    run = np.cumsum(starts) - 1
    lo = arr[starts, 0]
    hi = np.full(len(lo), -np.inf)
    np.maximum.at(hi, run, arr[:, 1])
    return np.column_stack([lo, hi])


@dataclass(frozen=True)
class BandSet:
    """Sorted, pairwise disjoint closed intervals ``[lo, hi]``.

    Construction merges overlaps and intervals closer than ``MERGE_TOL``.
    Degenerate intervals (``lo == hi``) are allowed and stand for points.
    """

    intervals: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        object.__setattr__(self, "intervals", merge_intervals(self.intervals))

    @classmethod
    def from_intervals(cls, intervals: Iterable, tol: float = MERGE_TOL) -> "BandSet":
        bs = cls.__new__(cls)
        object.__setattr__(bs, "intervals", merge_intervals(list(intervals), tol))
        return bs

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(map(tuple, self.intervals))

    def __repr__(self) -> str:
        return f"BandSet({len(self)} intervals, hull={self.hull if len(self) else None})"

    @property
    def lo(self) -> np.ndarray:
        return self.intervals[:, 0]

    @property
    def hi(self) -> np.ndarray:
        return self.intervals[:, 1]

    @property
    def hull(self) -> tuple:
        if not len(self):
            raise ValueError("empty BandSet has no hull")
        return float(self.intervals[0, 0]), float(self.intervals[-1, 1])

    @property
    def measure(self) -> float:
        return float(np.sum(self.hi - self.lo))

    @property
    def gaps(self) -> np.ndarray:
        """Bounded complementary intervals, as an ``(n-1, 2)`` array."""
        return np.column_stack([self.hi[:-1], self.lo[1:]])

    def mirrored(self) -> "BandSet":
        return BandSet(-self.intervals[::-1, ::-1])

    def is_symmetric(self, tol: float = MERGE_TOL) -> bool:
        """True when the set equals its reflection through 0 up to ``tol``."""
        other = self.mirrored()
        return len(other) == len(self) and bool(np.all(np.abs(other.intervals - self.intervals) <= tol))

    def shifted(self, delta: float) -> "BandSet":
        return BandSet(self.intervals + delta)

    def to_list(self) -> list:
        return self.intervals.tolist()


@dataclass(frozen=True)
class PointSet:
    """Sorted reals, deduplicated at ``POINT_TOL``, with separately flagged near-tangencies."""

    points: np.ndarray = field(default_factory=lambda: np.empty(0))
    tangencies: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        object.__setattr__(self, "points", _dedup(self.points))
        object.__setattr__(self, "tangencies", _dedup(self.tangencies))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points.tolist())

    def as_bandset(self) -> BandSet:
        return BandSet.from_intervals(np.column_stack([self.points, self.points]), tol=0.0)


def _dedup(values) -> np.ndarray:
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size < 2:
        return v
    keep = np.ones(v.size, dtype=bool)
    keep[1:] = np.diff(v) > POINT_TOL
    return v[keep]


SetLike = Union[BandSet, PointSet]


def _intervals_of(s: SetLike) -> np.ndarray:
    if isinstance(s, PointSet):
        return np.column_stack([s.points, s.points])
    if isinstance(s, BandSet):
        return s.intervals
    raise TypeError(f"expected BandSet or PointSet, got {type(s).__name__}")


def _distance_to(points: np.ndarray, ivs: np.ndarray) -> np.ndarray:
    """Distance from each point to a sorted disjoint interval union."""
    lo, hi = ivs[:, 0], ivs[:, 1]
    j = np.searchsorted(lo, points, side="right") - 1  # last interval starting at or left of the point
    left = np.where(j >= 0, np.maximum(points - hi[np.clip(j, 0, None)], 0.0), np.inf)
    nxt = np.clip(j + 1, 0, len(lo) - 1)
    right = np.where(j + 1 < len(lo), lo[nxt] - points, np.inf)
    return np.minimum(left, right)


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    """sup over the union ``a`` of the distance to the union ``b``."""
    # distance to b is piecewise linear with peaks only at midpoints of b's gaps,
    # so the sup over an interval of a sits at its ends or at such a midpoint
    mids = 0.5 * (b[:-1, 1] + b[1:, 0])
    k = np.searchsorted(a[:, 0], mids, side="right") - 1
    inside = (k >= 0) & (mids <= a[np.clip(k, 0, None), 1])
    cand = np.concatenate([a[:, 0], a[:, 1], mids[inside]])
    return float(np.max(_distance_to(cand, b)))


def hausdorff_distance(a: SetLike, b: SetLike) -> float:
    """Exact Hausdorff distance between two finite unions of closed intervals or points."""
    ia, ib = _intervals_of(a), _intervals_of(b)
    if len(ia) == 0 or len(ib) == 0:
        raise ValueError("Hausdorff distance is undefined for an empty set")
    return max(_directed(ia, ib), _directed(ib, ia))
