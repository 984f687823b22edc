"""Lee-Yang zeros of the Fibonacci Ising ring in a complex uniform field.

With ``alpha = exp(p_a / tau)``, ``beta = exp(p_b / tau)`` and the fugacity
``eta`` on the unit circle, the zeros of ``Z^(F_k)(eta)`` are described by
their abscissas ``eta_t = eta + conj(eta) = 2 cos(theta)`` in ``[-2, 2]``.

Two routes are implemented.  The primary one follows the trace map: the
zeros are the roots of ``g_k(eta_t) = pi f^(k-2)(transfer_triple(eta_t))``.
The oracle expands ``Z`` as a polynomial by summing over all spin
configurations and finds its roots with :func:`roots.polynomial_roots`.

:func:`transfer_triple` is built from half-traces of the normalised transfer
matrices of the words ``b``, ``a`` and ``ab``.  The closed-form curve
:func:`fugacity_curve` has the same period-six point at ``eta_t = 0`` (up to
one application of ``f``) and the same Fricke-Vogt level structure, but its
iterates do not reproduce the zeros, so it is kept for the geometry only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tracemap
from .classical import ThermoParams
from .roots import polynomial_roots
from .sequences import fibonacci, substitution_word
from .sets import PointSet, hausdorff_distance

ORACLE_MAX_SITES = 16
ROOT_TOL = 1e-12
TANGENCY_TOL = 1e-8
UNIT_CIRCLE_TOL = 1e-6


class LeeYangViolation(RuntimeError):
    """An oracle root lies off the unit circle, which signals a bug."""


@dataclass(frozen=True)
class FugacityParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 1 and self.beta > 1):
            raise ValueError(f"alpha and beta must exceed 1, got {self.alpha}, {self.beta}")

    @classmethod
    def from_thermo(cls, t: ThermoParams) -> "FugacityParams":
        c = t.couplings
        return cls(math.exp(c.p_a / t.tau), math.exp(c.p_b / t.tau))

    @property
    def period_six_height(self) -> float:
        """``a = (alpha^2 beta^2 - 1) / sqrt((alpha^4 - 1)(beta^4 - 1))``."""
        a2, b2 = self.alpha**2, self.beta**2
        return (a2 * b2 - 1) / math.sqrt((a2 * a2 - 1) * (b2 * b2 - 1))


def fugacity_curve(eta_t, f: FugacityParams):
    """``(ab eta_t / 2 sqrt(b^4-1), ab eta_t / 2 sqrt(a^4-1), (a^2 b^2 - 1)/sqrt((a^4-1)(b^4-1)))``."""
    e = np.asarray(eta_t, dtype=float)
    al, be = f.alpha, f.beta
    return (
        al * be * e / (2 * math.sqrt(be**4 - 1)),
        al * be * e / (2 * math.sqrt(al**4 - 1)),
        f.period_six_height + 0 * e,
    )


def fugacity_curve_invariant(eta_t, f: FugacityParams):
    """Closed form of the Fricke-Vogt invariant along :func:`fugacity_curve`."""
    e = np.asarray(eta_t, dtype=float)
    a2, b2 = f.alpha**2, f.beta**2
    return (a2 * b2 * e * e + 4) * (a2 - b2) ** 2 / (4 * (a2 * a2 - 1) * (b2 * b2 - 1))


def transfer_triple(eta_t, f: FugacityParams, with_derivative: bool = False):
    """Half-traces ``(x_ab, x_a, x_b)`` of the normalised transfer matrices, as functions of ``eta_t``.

    Returns the triple, and with ``with_derivative`` also its ``eta_t``-derivative.
    """
    e = np.asarray(eta_t, dtype=float)
    a2, b2 = f.alpha**2, f.beta**2
    sa, sb = math.sqrt(a2 * a2 - 1), math.sqrt(b2 * b2 - 1)
    t = ((a2 * b2 * (e * e - 2) + 2) / (2 * sa * sb), a2 * e / (2 * sa), b2 * e / (2 * sb))
    if not with_derivative:
        return t
    one = np.ones_like(e)
    return t, (a2 * b2 * e / (sa * sb), a2 / (2 * sa) * one, b2 / (2 * sb) * one)


def normalised_transfer(eta, f: FugacityParams, letter: str) -> np.ndarray:
    """Transfer matrix of one site with fugacity ``eta``, divided by the square root of its determinant."""
    K = math.log(f.alpha if letter == "a" else f.beta)
    m = np.array(
        [[math.exp(K) * eta, math.exp(-K) / eta], [math.exp(-K) * eta, math.exp(K) / eta]],
        dtype=complex,
    )
    return m / np.sqrt(2 * math.sinh(2 * K))


def _step_frozen(x, y, z, frozen):
    """One step of f; frozen (escaped) points are kept at the representative (2 sx, 2 sy, sz)."""
    x, y, z = 2 * x * y - z, x, y
    frozen = frozen | tracemap.certified_escape((x, y, z))
    # inside the cone sign(x') = sign(x y) and the cone is invariant, so only signs matter
    x = np.where(frozen, 2 * np.sign(x), x)
    y = np.where(frozen, 2 * np.sign(y), y)
    z = np.where(frozen, np.sign(z), z)
    return x, y, z, frozen


def g_k(eta_t, k: int, f: FugacityParams):
    """``(g, escaped)`` with ``g = pi f^(k-2)(transfer_triple(eta_t))``.

    Where ``escaped`` is True the magnitude of ``g`` is meaningless but its
    sign is exact: escaped orbits are reduced to sign representatives.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    x, y, z = (np.array(c, dtype=float) for c in np.broadcast_arrays(*transfer_triple(eta_t, f)))
    frozen = tracemap.certified_escape((x, y, z))
    x = np.where(frozen, 2 * np.sign(x), x)
    y = np.where(frozen, 2 * np.sign(y), y)
    z = np.where(frozen, np.sign(z), z)
    for _ in range(k - 2):
        x, y, z, frozen = _step_frozen(x, y, z, frozen)
    return x, frozen


def g_k_with_derivative(eta_t, k: int, f: FugacityParams):
    """``g_k`` and ``dg_k/d eta_t`` by propagating the tangent through Df (no escape freezing)."""
    t, dt = transfer_triple(eta_t, f, with_derivative=True)
    x, y, z = (np.array(c, dtype=float) for c in np.broadcast_arrays(*t))
    dx, dy, dz = (np.array(c, dtype=float) for c in np.broadcast_arrays(*dt))
    for _ in range(k - 2):
        x, y, z, dx, dy, dz = 2 * x * y - z, x, y, 2 * y * dx + 2 * x * dy - dz, dx, dy
    return x, dx


def _bisect_roots(lo, hi, k, f):
    s_lo = np.sign(g_k(lo, k, f)[0])
    for _ in range(200):
        if np.all(hi - lo <= ROOT_TOL):
            break
        mid = 0.5 * (lo + hi)
        s_mid = np.sign(g_k(mid, k, f)[0])
        exact = s_mid == 0
        go_right = (s_mid == s_lo) & ~exact
        lo = np.where(go_right, mid, np.where(exact, mid, lo))
        hi = np.where(go_right, hi, mid)
    return lo, hi


def _newton_polish(root, lo, hi, k, f, steps: int = 3):
    for _ in range(steps):
        g, dg = g_k_with_derivative(root, k, f)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = root - g / dg
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        better = ok & (np.abs(g_k_with_derivative(np.where(ok, cand, root), k, f)[0]) <= np.abs(g))
        root = np.where(better, cand, root)
    return root


def _tangencies(grid, g, escaped, sign_change_near, k, f):
    """Interior local minima of |g| without a sign change that dip below TANGENCY_TOL."""
    mag = np.where(escaped, np.inf, np.abs(g))
    i = np.arange(1, len(grid) - 1)
    cand = i[(mag[i] <= mag[i - 1]) & (mag[i] <= mag[i + 1]) & (mag[i] < 1e-3) & ~sign_change_near[i]]
    if cand.size == 0:
        return np.empty(0)
    a, b = grid[cand - 1].copy(), grid[cand + 1].copy()
    invphi = (math.sqrt(5) - 1) / 2
    for _ in range(80):  # golden-section search for the minimum of |g|
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        left = np.abs(g_k_with_derivative(c, k, f)[0]) < np.abs(g_k_with_derivative(d, k, f)[0])
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    x = 0.5 * (a + b)
    gx, _ = g_k_with_derivative(x, k, f)
    return x[(np.abs(gx) < TANGENCY_TOL) & (np.sign(g_k(a, k, f)[0]) == np.sign(g_k(b, k, f)[0]))]


def zero_set(k: int, f: FugacityParams, grid: int = 100_000) -> PointSet:
    """Roots of ``g_k`` in ``[-2, 2]``: sign-change scan, bisection to 1e-12 and Newton polish.

    Non-sign-changing near-zeros are returned separately as ``tangencies``.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    if grid < 10_000:
        raise ValueError("grid must be >= 10^4")
    xs = np.linspace(-2.0, 2.0, grid)
    g, escaped = g_k(xs, k, f)
    s = np.sign(g)
    exact = xs[s == 0]
    nz = np.nonzero(s)[0]
    # brackets between consecutive nonzero samples with opposite signs and no exact zero between
    pairs = nz[:-1][(s[nz[:-1]] * s[nz[1:]] < 0) & (np.diff(nz) == 1)]
    lo, hi = _bisect_roots(xs[pairs], xs[pairs + 1], k, f)
    roots = _newton_polish(0.5 * (lo + hi), lo, hi, k, f)
    near = np.zeros(grid, dtype=bool)
    near[pairs] = near[pairs + 1] = True
    near[1:] |= near[:-1].copy()
    near[:-1] |= near[1:].copy()
    tang = _tangencies(xs, g, escaped, near | (s == 0), k, f)
    return PointSet(np.concatenate([roots, exact]), tang)


def configuration_polynomial(k: int, f: FugacityParams) -> np.ndarray:
    """Coefficients (highest degree first) of ``eta^(F_k) Z^(F_k)(eta)``, degree ``2 F_k``."""
    n = fibonacci(k)
    if n > ORACLE_MAX_SITES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_SITES} sites, F_{k} = {n}")
    w = substitution_word(k)
    K = np.where(w.bits == 0, math.log(f.alpha), math.log(f.beta))
    codes = np.arange(1 << n, dtype=np.int64)
    spins = 1 - 2 * ((codes[:, None] >> np.arange(n)) & 1)
    bond = (spins * np.roll(spins, -1, axis=1)).astype(float) @ K
    m = spins.sum(axis=1)  # total magnetisation, exponent of eta
    coeffs = np.zeros(2 * n + 1)
    np.add.at(coeffs, m + n, np.exp(bond))
    return coeffs[::-1]


def zero_set_oracle(k: int, f: FugacityParams, return_roots: bool = False):
    """Zeros from the exhaustive configuration sum (``F_k <= 16``)."""
    coeffs = configuration_polynomial(k, f)
    r = polynomial_roots(coeffs)
    dev = np.abs(np.abs(r) - 1.0)
    if dev.max() > UNIT_CIRCLE_TOL:
        raise LeeYangViolation(f"oracle root off the unit circle by {dev.max():.3e}")
    upper = r[r.imag > 0]
    ps = PointSet(np.clip(2 * upper.real, -2.0, 2.0))
    return (ps, r) if return_roots else ps


def to_circle(ps) -> np.ndarray:
    """Angles ``theta = arccos(eta_t / 2)`` in ``[0, pi]``."""
    pts = np.asarray(ps.points if isinstance(ps, PointSet) else ps, dtype=float)
    if np.any(np.abs(pts) > 2.0):
        raise ValueError("eta_t outside [-2, 2] has no point on the unit circle")
    return np.arccos(pts / 2.0)


def convergence_diagnostic(f: FugacityParams, k_list: Sequence[int], grid: int = 100_000) -> list:
    """``[(k_i, hdist(Z_(k_i), Z_(k_(i+1)))), ...]`` for consecutive entries of ``k_list``."""
    ks = list(k_list)
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ValueError("k_list must be strictly ascending")
    sets = [zero_set(k, f, grid) for k in ks]
    return [(ks[i], hausdorff_distance(sets[i], sets[i + 1])) for i in range(len(ks) - 1)]


def endpoint_margin(k: int, f: FugacityParams) -> float:
    """``min |g_k(+-2)|``; positive means neither endpoint is a zero.

    An endpoint whose orbit has entered the escape cone has ``|g| > 1`` for
    good, so its contribution is capped below by 1 rather than left to overflow.
    """
    ends = np.array([-2.0, 2.0])
    _, escaped = g_k(ends, k, f)
    with np.errstate(over="ignore", invalid="ignore"):
        g = np.abs(g_k_with_derivative(ends, k, f)[0])
    g = np.where(escaped, np.where(np.isfinite(g), np.maximum(g, 1.0), np.inf), g)
    return float(np.min(g))
