"""Box-counting dimension, Newhouse thickness and the Astels sum criterion for interval unions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .sets import BandSet, PointSet

R2_IMPROVEMENT = 0.005
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class DimensionEstimate:
    slope: float
    intercept: float
    r_squared: float
    scale_range: tuple

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "scale_range": list(self.scale_range),
        }


@dataclass(frozen=True)
class ThicknessEstimate:
    tau: float
    nu: float
    gaps: list  # [((lo, hi), bridge_ratio), ...] in presentation order

    def to_dict(self) -> dict:
        tau = self.tau if math.isfinite(self.tau) else "inf"
        return {"tau": tau, "nu": self.nu, "gaps": [[list(g), r] for g, r in self.gaps]}


def _intervals(s: Union[BandSet, PointSet]) -> np.ndarray:
    if isinstance(s, PointSet):
        return np.column_stack([s.points, s.points])
    return s.intervals


def _lattice_floor(v: np.ndarray) -> np.ndarray:
    # endpoints sitting on a box boundary up to rounding are snapped onto it,
    # so that translating the set cannot move them across the boundary
    r = np.round(v)
    v = np.where(np.abs(v - r) <= SNAP_TOL * np.maximum(1.0, np.abs(v)), r, v)
    return np.floor(v).astype(np.int64)


def box_count(ivs: np.ndarray, eps: float, anchor: float) -> int:
    """Number of lattice boxes ``[anchor + j eps, anchor + (j+1) eps)`` meeting the union."""
    first = _lattice_floor((ivs[:, 0] - anchor) / eps)
    last = _lattice_floor((ivs[:, 1] - anchor) / eps)
    # intervals are sorted and disjoint, so `last` is non-decreasing and only
    # the previous interval can share boxes with the current one
    prev_last = np.concatenate([[np.iinfo(np.int64).min], last[:-1]])
    new = last - np.maximum(first, prev_last + 1) + 1
    return int(np.sum(np.clip(new, 0, None)))


def _fit(log_inv_eps: np.ndarray, log_n: np.ndarray):
    slope, intercept = np.polyfit(log_inv_eps, log_n, 1)
    resid = log_n - (slope * log_inv_eps + intercept)
    ss_tot = float(np.sum((log_n - log_n.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def box_counting(
    s: Union[BandSet, PointSet],
    eps_min: float,
    eps_max: float,
    levels: int = 12,
    offsets: Sequence[float] = (0.0,),
) -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log(1/eps) over geometric scales.

    The lattice is anchored at the left end of the hull, shifted by each of
    ``offsets`` (fractions of a box) with the counts averaged.  The smallest
    and largest scales are dropped when that raises r^2 by at least 0.005.
    """
    if not 0 < eps_min < eps_max:
        raise ValueError("need 0 < eps_min < eps_max")
    if levels < 5:
        raise ValueError("levels must be >= 5")
    ivs = _intervals(s)
    if len(ivs) == 0:
        raise ValueError("cannot box-count an empty set")
    eps = np.geomspace(eps_max, eps_min, levels)
    left = ivs[0, 0]
    counts = np.array([np.mean([box_count(ivs, e, left - o * e) for o in offsets]) for e in eps])
    if len(np.unique(counts)) < 2:
        raise ValueError("degenerate regression: box counts do not vary over the scale range")
    x, y = np.log(1.0 / eps), np.log(counts)
    slope, intercept, r2 = _fit(x, y)
    used = (float(eps_min), float(eps_max))
    if levels - 2 >= 3 and len(np.unique(counts[1:-1])) >= 2:
        s2, i2, r2b = _fit(x[1:-1], y[1:-1])
        if r2b - r2 >= R2_IMPROVEMENT:
            slope, intercept, r2 = s2, i2, r2b
            used = (float(eps[-2]), float(eps[1]))
    return DimensionEstimate(slope, intercept, r2, used)


def _previous_smaller(rank: np.ndarray) -> np.ndarray:
    """Index of the nearest earlier position holding a smaller rank (-1 if none)."""
    out = np.full(len(rank), -1)
    stack: list = []
    for i, r in enumerate(rank):
        while stack and rank[stack[-1]] > r:
            stack.pop()
        out[i] = stack[-1] if stack else -1
        stack.append(i)
    return out


def thickness(s: BandSet) -> ThicknessEstimate:
    """Newhouse thickness for the presentation that removes gaps longest first.

    For each gap the bridges on either side run to the nearest gap removed
    earlier (or to the hull end); the thickness is the least bridge-to-gap
    ratio.  A single interval gets ``tau = inf`` and ``nu = 1``.
    """
    ivs = s.intervals
    if len(ivs) == 0:
        raise ValueError("thickness of an empty set is undefined")
    if len(ivs) == 1:
        return ThicknessEstimate(math.inf, 1.0, [])
    g_lo, g_hi = ivs[:-1, 1], ivs[1:, 0]
    length = g_hi - g_lo
    order = np.argsort(-length, kind="stable")
    rank = np.empty(len(order), dtype=int)
    rank[order] = np.arange(len(order))

    # bridges end at the closest gap with an earlier rank on each side
    left_nb = _previous_smaller(rank)
    right_nb = len(rank) - 1 - _previous_smaller(rank[::-1])[::-1]
    right_nb[right_nb == len(rank)] = -1
    left_end = np.where(left_nb >= 0, g_hi[np.clip(left_nb, 0, None)], ivs[0, 0])
    right_end = np.where(right_nb >= 0, g_lo[np.clip(right_nb, 0, None)], ivs[-1, 1])
    bridge = np.minimum(g_lo - left_end, right_end - g_hi)
    with np.errstate(divide="ignore"):
        ratio = np.where(length > 0, bridge / length, np.inf)
    tau = float(np.min(ratio))
    gaps = [((float(g_lo[i]), float(g_hi[i])), float(ratio[i])) for i in order]
    return ThicknessEstimate(tau, tau / (1.0 + tau), gaps)


def astels_interval_check(s: BandSet, m: int) -> bool:
    """True when ``m * nu(s) >= 1``, the condition for the m-fold sum to be an interval.

    The comparison allows a relative rounding slack of 1e-9, so the middle-thirds
    set (``nu = 1/2`` exactly) passes for ``m = 2``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return m * thickness(s).nu >= 1.0 - 1e-9


def dimension_lower_bound(t: ThicknessEstimate) -> float:
    """``log 2 / log(2 + 1/tau)``."""
    if not t.tau > 0:
        raise ValueError("lower bound needs tau > 0")
    if math.isinf(t.tau):
        return 1.0
    return math.log(2.0) / math.log(2.0 + 1.0 / t.tau)


def local_dimension_profile(
    s: BandSet,
    window_count: int = 8,
    eps_min: float = None,
    levels: int = 10,
    window_scale: float = 8.0,
    n_offsets: int = 8,
) -> list:
    """Box-counting estimates on ``window_count`` half-overlapping windows of the hull.

    Scales run from ``width / window_scale`` down to ``eps_min`` (default
    ``width / 2**12``), with counts averaged over ``n_offsets`` lattice
    anchors; a window cut from a self-similar set is rarely aligned with it.
    Windows whose counts do not vary are left out.
    """
    if window_count < 3:
        raise ValueError("window_count must be >= 3")
    lo, hi = s.hull
    width = 2 * (hi - lo) / (window_count + 1)
    eps_max = width / window_scale
    eps_min = width / 2**12 if eps_min is None else eps_min
    out = []
    for i in range(window_count):
        a = lo + i * width / 2
        b = a + width
        ivs = s.intervals
        keep = (ivs[:, 1] >= a) & (ivs[:, 0] <= b)
        if not keep.any():
            continue
        clipped = BandSet.from_intervals(np.clip(ivs[keep], a, b), tol=0.0)
        try:
            est = box_counting(clipped, eps_min, eps_max, levels, offsets=np.arange(n_offsets) / n_offsets)
        except ValueError:
            continue
        out.append((0.5 * (a + b), est))
    return out


def middle_thirds(level: int) -> BandSet:
    """Level-``level`` approximation of the middle-thirds Cantor set, ``2**level`` intervals."""
    if level < 0:
        raise ValueError("level must be >= 0")
    ivs = np.array([[0.0, 1.0]])
    for _ in range(level):
        third = (ivs[:, 1] - ivs[:, 0]) / 3
        ivs = np.vstack([np.column_stack([ivs[:, 0], ivs[:, 0] + third]), np.column_stack([ivs[:, 1] - third, ivs[:, 1]])])
    return BandSet(ivs)
