"""Single-fermion spectra of the Fibonacci quantum Ising chain.

After the Jordan-Wigner reduction the squared energies ``x = lambda**2`` are
the spectrum of the Jacobi operator ``U U^T`` with diagonal ``1 + J_n**2`` and
off-diagonal ``J_n`` (transverse field scaled to 1).  For a periodic chain the
monodromy of its three-term recurrence has trace ``D(x)`` and the spectrum is
``{x : |D(x)| <= 2}``, a union of as many bands as the period.

On the trace-map side, half of ``D`` for the period ``F_k`` word equals the
first coordinate of ``f^(k-1)`` applied to :func:`trace_curve`, which is the
line of :func:`gamma_line` with the two letters exchanged.  The offset and the
exchange are checked numerically by :func:`calibrate_iterate_offset`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tracemap
from .sequences import CouplingMap, Word, as_word, substitution_word
from .sets import MERGE_TOL, BandSet, merge_intervals

ITERATE_OFFSET = -1  # sigma_k half-trace = pi f^(k + ITERATE_OFFSET)(trace_curve(E))
EDGE_TOL = 1e-12
MAX_BISECTIONS = 200
MIN_WINDOW_SAMPLES = 48
SPLIT_MARGIN = 1e-6  # |D| below 2 - margin at a shared band endpoint marks a spurious split


@dataclass(frozen=True)
class SpectrumParams:
    couplings: CouplingMap
    generation: int
    grid_resolution: int = 4000
    orbit_cap: Optional[int] = None
    bound: float = 1e6

    def __post_init__(self):
        if self.generation < 2:
            raise ValueError("generation must be >= 2")
        if self.grid_resolution < 1000:
            raise ValueError("grid_resolution must be >= 1000")
        if self.orbit_cap is not None and self.orbit_cap < 1:
            raise ValueError("orbit_cap must be >= 1")

    @property
    def effective_orbit_cap(self) -> int:
        return self.generation if self.orbit_cap is None else self.orbit_cap


def gamma_line(E, c: CouplingMap):
    """The line ``E -> ((E^2 - 1 - p_b^2)/2p_b, (E^2 - 1 - p_a^2)/2p_a, (p_a^2 + p_b^2)/2p_a p_b)``."""
    E2 = np.asarray(E, dtype=float) ** 2
    pa, pb = c.p_a, c.p_b
    z = (pa * pa + pb * pb) / (2 * pa * pb)
    return ((E2 - 1 - pb * pb) / (2 * pb), (E2 - 1 - pa * pa) / (2 * pa), z + 0 * E2)


def trace_curve(E, c: CouplingMap):
    """Starting triple whose iterates carry the half-traces of the Fibonacci approximants."""
    return gamma_line(E, c.swapped())


def half_trace(E, k: int, c: CouplingMap):
    """``pi f^(k + ITERATE_OFFSET)(trace_curve(E))``, i.e. half the discriminant of the period-F_k chain."""
    m = k + ITERATE_OFFSET
    if m < 0:
        raise ValueError("k too small for the calibrated iterate offset")
    return tracemap.iterate(trace_curve(E, c), m)[0]


# ---------------------------------------------------------------- discriminant


def _letter_matrix(x, J: float, with_derivative: bool):
    """Unimodular one-step matrix ``[[(x-1-J^2)/J, -1/J], [J, 0]]`` as four arrays (and d/dx)."""
    one = np.ones_like(x)
    m = ((x - 1 - J * J) / J, -one / J, J * one, 0 * one)
    if not with_derivative:
        return m, None
    zero = 0 * one
    return m, (one / J, zero, zero, zero)


def _mul(p, q):
    a, b, c, d = p
    e, f, g, h = q
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mul_d(p, dp, q, dq):
    """Product and its derivative by the product rule."""
    prod = _mul(p, q)
    dprod = tuple(u + v for u, v in zip(_mul(dp, q), _mul(p, dq)))
    return prod, dprod


def _rescale(m, dm, log_scale):
    """Divide ``m`` (and ``dm``) by the largest |entry| of ``m`` pointwise, accumulating its log."""
    s = np.maximum.reduce([np.abs(e) for e in m])
    s = np.where(s > 0, s, 1.0)
    m = tuple(e / s for e in m)
    dm = None if dm is None else tuple(e / s for e in dm)
    return m, dm, log_scale + np.log(s)


def _scaled_monodromy(x, w, c: CouplingMap, with_derivative: bool):
    """``(m, dm, log_scale)`` with the monodromy equal to ``m * exp(log_scale)``.

    Products are renormalised as they are formed, so long words at energies
    far from the spectrum cannot overflow; the common positive scale leaves
    the signs of the trace and its derivative intact.
    """
    w = as_word(w)
    if len(w) == 0:
        raise ValueError("word must be non-empty")
    x = np.asarray(x, dtype=float)
    zero = np.zeros_like(x)
    mats = [_letter_matrix(x, J, with_derivative) for J in (c.p_a, c.p_b)]
    if w.generation is not None:
        # words b, a; M_k = M_(k-2) M_(k-1)
        prev = (*mats[1], zero)
        cur = (*mats[0], zero)
        for _ in range(w.generation - 1):
            if with_derivative:
                m, dm = _mul_d(prev[0], prev[1], cur[0], cur[1])
            else:
                m, dm = _mul(prev[0], cur[0]), None
            prev, cur = cur, _rescale(m, dm, prev[2] + cur[2])
        return cur
    m, dm = mats[w.bits[0]]
    log_scale = zero
    for i, bit in enumerate(w.bits[1:]):
        step, dstep = mats[bit]
        if with_derivative:
            m, dm = _mul_d(step, dstep, m, dm)
        else:
            m = _mul(step, m)
        if i % 16 == 15:
            m, dm, log_scale = _rescale(m, dm, log_scale)
    return m, dm, log_scale


def _unscale(v, log_scale):
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(v == 0, 0.0, v * np.exp(log_scale))


def monodromy(x, w, c: CouplingMap, with_derivative: bool = False):
    """Ordered product ``B_N ... B_1`` of letter matrices, vectorised over ``x``.

    Returned as a 4-tuple ``(m11, m12, m21, m22)`` (plus its x-derivative).
    Generation-tagged words use ``M_k = M_(k-2) M_(k-1)``, so the cost is
    ``O(k)`` rather than ``O(F_k)`` matrix products.  Entries too large for
    floating point come back as infinities.
    """
    m, dm, log_scale = _scaled_monodromy(x, w, c, with_derivative)
    m = tuple(_unscale(e, log_scale) for e in m)
    if not with_derivative:
        return m
    return m, tuple(_unscale(e, log_scale) for e in dm)


def jacobi_discriminant(x, w, c: CouplingMap, with_derivative: bool = False):
    """Trace of the one-period monodromy at ``x = lambda^2`` (and its x-derivative)."""
    m, dm, log_scale = _scaled_monodromy(x, w, c, with_derivative)
    d = _unscale(m[0] + m[3], log_scale)
    if with_derivative:
        return d, _unscale(dm[0] + dm[3], log_scale)
    return d


def spectral_bound(c: CouplingMap) -> float:
    """Upper bound ``(1 + max p)^2`` on the squared single-fermion energies."""
    return (1.0 + max(c.p_a, c.p_b)) ** 2


# ---------------------------------------------------------------- bands


def _bisect(fn, lo, hi, target_sign_lo):
    """Vectorised bisection for a sign change of ``fn`` on ``[lo, hi]``."""
    lo, hi = lo.copy(), hi.copy()
    for _ in range(MAX_BISECTIONS):
        if np.all(hi - lo <= EDGE_TOL * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        left = np.sign(fn(mid)) == target_sign_lo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _bands_in_windows(w: Word, c: CouplingMap, windows: np.ndarray, samples: np.ndarray) -> np.ndarray:
    """Bands ``{|D| <= 2}`` inside each window, one per monotone piece of ``D``."""
    D = lambda x: jacobi_discriminant(x, w, c)  # noqa: E731
    dD = lambda x: jacobi_discriminant(x, w, c, with_derivative=True)[1]  # noqa: E731

    # monotone pieces are delimited by the critical points of D, one per gap
    grids = [np.linspace(lo, hi, n) for (lo, hi), n in zip(windows, samples)]
    owner = np.concatenate([np.full(len(g), i) for i, g in enumerate(grids)])
    xs = np.concatenate(grids)
    slope = np.sign(dD(xs))
    flip = (slope[:-1] * slope[1:] < 0) & (owner[:-1] == owner[1:])
    idx = np.nonzero(flip)[0]
    crit = _bisect(dD, xs[idx], xs[idx + 1], slope[idx]) if idx.size else np.empty(0)
    cut_owner = owner[idx]

    piece_lo, piece_hi = [], []
    for i, (lo, hi) in enumerate(windows):
        cuts = crit[cut_owner == i]
        edges = np.concatenate([[lo], cuts, [hi]])
        piece_lo.append(edges[:-1])
        piece_hi.append(edges[1:])
    plo, phi = np.concatenate(piece_lo), np.concatenate(piece_hi)

    dlo, dhi = D(plo), D(phi)
    rising = dhi >= dlo
    lo_val, hi_val = np.where(rising, dlo, dhi), np.where(rising, dhi, dlo)  # D at the piece's min / max
    has_band = (hi_val >= -2.0) & (lo_val <= 2.0)

    # on a rising piece the band runs from D = -2 up to D = +2, on a falling one the reverse
    band_lo, band_hi = plo.copy(), phi.copy()
    ends = (
        (band_lo, has_band & np.where(rising, dlo < -2.0, dlo > 2.0), np.where(rising, -2.0, 2.0)),
        (band_hi, has_band & np.where(rising, dhi > 2.0, dhi < -2.0), np.where(rising, 2.0, -2.0)),
    )
    for out, need, level in ends:
        if need.any():
            g = _LevelFn(D, level[need])
            a = plo[need]
            out[need] = _bisect(g, a, phi[need], np.sign(g(a)))
    bands = np.column_stack([band_lo[has_band], band_hi[has_band]])
    return _join_split_bands(bands, D)


def _join_split_bands(bands: np.ndarray, D) -> np.ndarray:
    """Rejoin bands cut at a spurious critical point.

    Rounding noise in D' can fake a critical point inside a band; the two
    halves then share an endpoint where |D| < 2.  Genuinely touching bands
    meet at a closed gap, where |D| = 2.
    """
    if len(bands) < 2:
        return bands
    bands = bands[np.argsort(bands[:, 0], kind="stable")]
    shared = bands[1:, 0] == bands[:-1, 1]
    if shared.any():
        inside = np.abs(D(bands[:-1, 1][shared])) < 2.0 - SPLIT_MARGIN
        cut = np.zeros(len(bands) - 1, dtype=bool)
        cut[np.nonzero(shared)[0][inside]] = True
        if cut.any():
            start = np.concatenate([[True], ~cut])
            run = np.cumsum(start) - 1
            hi = np.full(run[-1] + 1, -np.inf)
            np.maximum.at(hi, run, bands[:, 1])
            bands = np.column_stack([bands[start, 0], hi])
    return bands


class _LevelFn:
    """``x -> D(x) - level`` for a vector of levels aligned with the bisection arrays."""

    def __init__(self, D, level):
        self.D, self.level = D, level

    def __call__(self, x):
        return self.D(x) - self.level


def _window_samples(windows: np.ndarray, total: float, resolution: int, factor: int) -> np.ndarray:
    widths = windows[:, 1] - windows[:, 0]
    n = np.ceil(resolution * widths / total).astype(int)
    return np.maximum(n, MIN_WINDOW_SAMPLES) * factor


def x_bands(w, c: CouplingMap, grid_resolution: int = 4000, windows=None, max_refinements: int = 5) -> np.ndarray:
    """Floquet bands of the periodic chain in the variable ``x = lambda^2``.

    Returns an ``(N, 2)`` array with exactly ``N = |w|`` rows (touching bands
    are kept separate here).  ``windows`` may restrict the search to a union of
    intervals known to contain the spectrum.  Raises ``RuntimeError`` when the
    refined scan still does not find ``N`` bands.
    """
    w = as_word(w)
    n_expected = len(w)
    top = spectral_bound(c) * (1 + 1e-9) + 1e-9
    if windows is None:
        windows = np.array([[-1e-9, top]])
    windows = np.asarray(windows, dtype=float)
    factor = 1
    for _ in range(max_refinements + 1):
        samples = _window_samples(windows, top, grid_resolution, factor)
        bands = _bands_in_windows(w, c, windows, samples)
        if len(bands) == n_expected:
            bands = np.clip(bands, 0.0, None)
            return bands[np.argsort(bands[:, 0])]
        factor *= 2
    raise RuntimeError(
        f"found {len(bands)} bands for a period-{n_expected} chain after {max_refinements} grid refinements; "
        "increase grid_resolution (for long periods at strongly unequal couplings the discriminant "
        "loses its accuracy in double precision, and a finer grid will not help)"
    )


def fibonacci_x_bands(k: int, c: CouplingMap, grid_resolution: int = 4000) -> list:
    """``[bands_1, ..., bands_k]`` for the Fibonacci approximants, each found inside
    the union of the two previous band sets (sigma_j lies in sigma_(j-1) U sigma_(j-2))."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = []
    pad = 1e-9
    for j in range(1, k + 1):
        w = substitution_word(j)
        if j <= 3:
            out.append(x_bands(w, c, grid_resolution))
            continue
        prev = np.vstack([out[-1], out[-2]])
        windows = merge_intervals(prev + np.array([-pad, pad]) * np.maximum(1.0, np.abs(prev)), tol=0.0)
        try:
            out.append(x_bands(w, c, grid_resolution, windows=windows))
        except RuntimeError:
            out.append(x_bands(w, c, grid_resolution * 4))
    return out


def x_to_lambda(bands_x: np.ndarray, tol: float = MERGE_TOL) -> BandSet:
    """Map x-bands to the symmetric lambda-bands ``+-sqrt(x)``."""
    root = np.sqrt(np.clip(np.asarray(bands_x, dtype=float), 0.0, None))
    return BandSet.from_intervals(np.vstack([root, -root[:, ::-1]]), tol=tol)


def sigma_k(params: SpectrumParams) -> BandSet:
    """Spectrum of the period-F_k approximant in the energy variable lambda."""
    bands = fibonacci_x_bands(params.generation, params.couplings, params.grid_resolution)[-1]
    return x_to_lambda(bands)


def sigma_k_x(params: SpectrumParams) -> np.ndarray:
    """The ``F_k`` x-bands of the period-F_k approximant, touching bands not merged."""
    return fibonacci_x_bands(params.generation, params.couplings, params.grid_resolution)[-1]


def calibrate_iterate_offset(c: CouplingMap, k_range=range(2, 7), n_points: int = 9, rtol: float = 1e-9):
    """Find ``(swap, m - k)`` with ``pi f^m(curve(E)) == D_k(E^2)/2`` on a test grid.

    Both orientations of :func:`gamma_line` and offsets ``-3..3`` are tried;
    the first combination that matches for every ``k`` in ``k_range`` wins.
    Returns ``None`` when nothing matches.
    """
    E = np.linspace(0.1, math.sqrt(spectral_bound(c)), n_points)
    for swap in (False, True):
        curve = gamma_line(E, c.swapped() if swap else c)
        for offset in range(-3, 4):
            ok = True
            for k in k_range:
                m = k + offset
                if m < 0:
                    ok = False
                    break
                target = 0.5 * jacobi_discriminant(E * E, substitution_word(k), c)
                got = tracemap.iterate(curve, m)[0]
                if not np.allclose(got, target, rtol=rtol, atol=rtol):
                    ok = False
                    break
            if ok:
                return swap, offset
    return None


# ---------------------------------------------------------------- B_infinity


def escape_bracket(c: CouplingMap, n_probe: int = 3) -> float:
    """Smallest tried ``E_max`` past the spectral bound at which the orbit of the curve certifies escape quickly."""
    E = math.sqrt(spectral_bound(c))
    for _ in range(200):
        t = trace_curve(E, c)
        for _ in range(n_probe):
            if tracemap.certified_escape(t):
                return E
            t = tracemap.apply_f(t)
        E *= 1.05
    raise RuntimeError("could not bracket the bounded set")


def b_infty_grid(params: SpectrumParams):
    """``(E_max, grid_step)`` used by :func:`b_infty_approx`."""
    E_max = escape_bracket(params.couplings)
    return E_max, 2 * E_max / (params.grid_resolution - 1)


def _cells_with_bounded_orbit(lo, h, c, cap, bound, oversample, depth, margin):
    """Mask over cells ``[lo, lo + h]`` that contain a probe with a bounded orbit.

    Cells whose probes all escape, but only near the cap, are subdivided
    ``oversample``-fold up to ``depth`` times, because narrow bands of the
    bounded set are surrounded by late-escaping energies.
    """
    probes = lo[:, None] + h * (np.arange(oversample) + 0.5)[None, :] / oversample
    times = tracemap.escape_time(trace_curve(probes.ravel(), c), cap, bound).reshape(probes.shape)
    best = times.max(axis=1)
    hit = best > cap
    close = ~hit & (best >= cap - margin)
    if depth > 0 and close.any():
        sub_h = h / oversample
        sub_lo = (lo[close][:, None] + sub_h * np.arange(oversample)[None, :]).ravel()
        sub_hit = _cells_with_bounded_orbit(sub_lo, sub_h, c, cap, bound, oversample, depth - 1, margin)
        hit[np.nonzero(close)[0]] = sub_hit.reshape(-1, oversample).any(axis=1)
    return hit


def b_infty_approx(params: SpectrumParams, oversample: int = 8, depth: int = 4, margin: int = 2) -> BandSet:
    """Grid cells of ``[-E_max, E_max]`` containing an energy whose orbit stays bounded.

    Each cell is probed at ``oversample`` points, with adaptive subdivision of
    cells whose probes escape only late (see :func:`_cells_with_bounded_orbit`),
    so bands narrower than the grid step are still caught.  The result is a
    union of whole cells; its resolution is the step from :func:`b_infty_grid`.
    """
    E_max, h = b_infty_grid(params)
    n_cells = params.grid_resolution - 1
    edges = -E_max + h * np.arange(n_cells + 1)
    # symmetric in E, so probe the right half and mirror
    cell_lo = edges[edges >= -h / 2][:-1]
    hit = _cells_with_bounded_orbit(
        cell_lo, h, params.couplings, params.effective_orbit_cap, params.bound, oversample, depth, margin
    )
    cells = np.column_stack([cell_lo[hit], cell_lo[hit] + h])
    right = merge_intervals(cells, tol=h * 1e-6)
    return BandSet.from_intervals(np.vstack([right, -right[:, ::-1]]), tol=h * 1e-6)


# ---------------------------------------------------------------- many fermions


def _minkowski_pair(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    sums = (a[:, None, :] + b[None, :, :]).reshape(-1, 2)
    return merge_intervals(sums, tol)


def fermion_sum(bands: BandSet, N: int, tol: float = MERGE_TOL) -> BandSet:
    """``N``-fold Minkowski sum ``B + ... + B`` by pairwise interval sums with merging."""
    if N < 1:
        raise ValueError("N must be >= 1")
    base = bands.intervals
    result = None
    # binary powering; the sum is associative and commutative
    while True:
        if N & 1:
            result = base if result is None else _minkowski_pair(result, base, tol)
        N >>= 1
        if not N:
            break
        base = _minkowski_pair(base, base, tol)
    return BandSet.from_intervals(result, tol=tol)


__all__ = [
    "ITERATE_OFFSET",
    "SpectrumParams",
    "gamma_line",
    "trace_curve",
    "half_trace",
    "monodromy",
    "jacobi_discriminant",
    "spectral_bound",
    "x_bands",
    "fibonacci_x_bands",
    "x_to_lambda",
    "sigma_k",
    "sigma_k_x",
    "calibrate_iterate_offset",
    "escape_bracket",
    "b_infty_grid",
    "b_infty_approx",
    "fermion_sum",
]
