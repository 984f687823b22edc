"""Fibonacci trace map f(x, y, z) = (2xy - z, x, y) and its invariant structure.

All point maps accept scalars or numpy arrays for each coordinate and return a
3-tuple.  Coordinates are saturated at ``SATURATION`` so escaping orbits never
produce infinities or NaNs; any saturated point lies deep in the escape cone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .sequences import PHI

SATURATION = 1e300
LOG_SWITCH = 1e100  # float -> log-magnitude representation threshold in escape_rate

BOUNDED = "bounded"
ESCAPED = "escaped"


def _sat(v):
    with np.errstate(over="ignore", invalid="ignore"):
        return np.clip(v, -SATURATION, SATURATION)


def apply_f(t):
    x, y, z = t
    with np.errstate(over="ignore", invalid="ignore"):
        return (_sat(2 * x * y - z), x, y)


def apply_f_inv(t):
    x, y, z = t
    with np.errstate(over="ignore", invalid="ignore"):
        return (y, z, _sat(2 * y * z - x))


def iterate(t, n: int):
    """``f^n(t)``; negative ``n`` iterates the inverse."""
    step = apply_f if n >= 0 else apply_f_inv
    for _ in range(abs(n)):
        t = step(t)
    return t


def fricke_vogt(t):
    """Fricke-Vogt invariant I = x^2 + y^2 + z^2 - 2xyz - 1."""
    x, y, z = t
    return x * x + y * y + z * z - 2 * x * y * z - 1


def certified_escape(t):
    """True where |x| > 1, |y| > 1 and |xy| > |z| (forward orbit unbounded)."""
    x, y, z = (np.abs(c) for c in t)
    return (x > 1) & (y > 1) & (x * y > z)


@dataclass
class OrbitOutcome:
    status: str
    steps_used: int
    escape_index: Optional[int] = None
    rate_estimate: Optional[float] = None
    magnitude_only: bool = False


def iterate_orbit(t, n_max: int = 2000, bound: float = 1e6, hard_cap: Optional[int] = None) -> OrbitOutcome:
    """Follow the forward orbit of a single point.

    Escape is certified by the cone test at every step, before any magnitude
    cut-off.  An orbit that exceeds ``bound`` without entering the cone is
    followed up to ``hard_cap`` (default ``n_max + 200``) more steps and then
    reported as escaped with ``magnitude_only=True``.

    ``Fraction`` coordinates are iterated exactly; periodic saddles such as the
    points of rho_1 only stay bounded that way, since rounding errors grow
    geometrically along their unstable direction.
    """
    if n_max < 1 or bound <= 0:
        raise ValueError("n_max must be >= 1 and bound > 0")
    hard_cap = n_max + 200 if hard_cap is None else hard_cap
    t = tuple(c if isinstance(c, Fraction) else float(c) for c in t)
    start = tuple(float(c) for c in t)
    exceeded_at = None
    n = 0
    while True:
        if certified_escape(t):
            try:
                rate = escape_rate(start)
            except ValueError:
                rate = None
            return OrbitOutcome(ESCAPED, n, escape_index=n, rate_estimate=rate)
        if exceeded_at is None and max(abs(c) for c in t) > bound:
            exceeded_at = n
        if exceeded_at is not None and n >= exceeded_at + hard_cap:
            return OrbitOutcome(ESCAPED, n, escape_index=exceeded_at, magnitude_only=True)
        if exceeded_at is None and n >= n_max:
            return OrbitOutcome(BOUNDED, n)
        x, y, z = t
        t = (2 * x * y - z, x, y) if isinstance(x, Fraction) else apply_f(t)
        n += 1


def escape_time(t, n_steps: int, bound: float = 1e6) -> np.ndarray:
    """Vectorised escape times over arrays of starting points.

    Entry ``n`` is the first step at which the orbit enters the escape cone or
    leaves the ``bound`` box; orbits that do neither within ``n_steps`` steps
    get ``n_steps + 1``.  Escaped points are frozen at zero so they cannot
    overflow.
    """
    x, y, z = np.broadcast_arrays(*(np.asarray(c, dtype=float) for c in t))
    x, y, z = x.copy(), y.copy(), z.copy()
    times = np.full(x.shape, n_steps + 1, dtype=np.int64)
    alive = np.ones(x.shape, dtype=bool)
    for n in range(n_steps + 1):
        out = certified_escape((x, y, z)) | (np.maximum(np.abs(x), np.maximum(np.abs(y), np.abs(z))) > bound)
        times[alive & out] = n
        alive &= ~out
        if n == n_steps or not alive.any():
            break
        x, y, z = np.where(alive, 2 * x * y - z, 0.0), np.where(alive, x, 0.0), np.where(alive, y, 0.0)
    return times


def bounded_mask(t, n_steps: int, bound: float = 1e6) -> np.ndarray:
    """True where the orbit stays out of the escape cone and inside ``bound`` for ``n_steps`` steps."""
    return escape_time(t, n_steps, bound) > n_steps


class _LogTriple:
    """Escaping-orbit state as (unit phase, log-magnitude) per coordinate."""

    def __init__(self, t):
        self.s = [c / abs(c) for c in t]
        self.l = [math.log(abs(c)) for c in t]

    def step(self):
        (sx, sy, sz), (lx, ly, lz) = self.s, self.l
        lead = math.log(2.0) + lx + ly
        # z / (2xy); |ratio| < 1/2 inside the escape cone
        r = sz / (sx * sy) * math.exp(lz - lead) if lz - lead > -745 else 0.0
        corr = 1.0 - r
        self.s = [sx * sy * corr / abs(corr), sx, sy]
        self.l = [lead + math.log(abs(corr)), lx, ly]

    def log_first(self) -> float:
        return self.l[0]

    def log_norm(self) -> float:
        return max(self.l)


def _log_orbit(t, n_steps: int, switch: float = LOG_SWITCH):
    """Yield ``(phase_x, log|x|, log||.||_max)`` for f^n(t), n = 0..n_steps.

    Plain floating point is used until a coordinate exceeds ``switch`` in
    modulus, then the recursion continues in log-magnitude form; this needs the
    orbit to be inside the escape cone at the switch.
    """
    cur = tuple(complex(c) if isinstance(c, complex) else float(c) for c in t)
    state = None
    for n in range(n_steps + 1):
        if state is None:
            mags = [abs(c) for c in cur]
            x = cur[0]
            yield (
                x / mags[0] if mags[0] > 0 else 0.0,
                math.log(mags[0]) if mags[0] > 0 else -math.inf,
                math.log(max(mags)) if max(mags) > 0 else -math.inf,
            )
            if max(mags) > switch:
                if not certified_escape(cur):
                    raise OverflowError("orbit left float range outside the escape cone")
                state = _LogTriple(cur)
                state.step()
            else:
                x, y, z = cur
                cur = (2 * x * y - z, x, y)
        else:
            yield state.s[0], state.log_first(), state.log_norm()
            state.step()


def escape_rate_estimates(t, n_steps: int):
    """Arrays ``(e_norm, e_first)`` of log ||f^n(t)||_max / phi^n and log |pi f^n(t)| / phi^n."""
    logs = np.array([(lf, ln) for _, lf, ln in _log_orbit(t, n_steps)])
    scale = PHI ** np.arange(n_steps + 1)
    return logs[:, 1] / scale, logs[:, 0] / scale


def escape_rate(t, tol: float = 1e-12, max_iter: int = 400, first_coordinate: bool = False) -> float:
    """Limit of log ||f^n(t)|| / phi^n along a certified-escaping orbit.

    Raises ``ValueError`` ("not escaping") when the cone test never holds
    within ``max_iter`` steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cur = tuple(complex(c) if isinstance(c, complex) else float(c) for c in t)
    n0 = None
    for n in range(max_iter):
        if certified_escape(cur):
            n0 = n
            break
        x, y, z = cur
        cur = (2 * x * y - z, x, y)
        if max(abs(c) for c in cur) > SATURATION:
            break
    if n0 is None:
        raise ValueError("not escaping: orbit not certified within the iteration cap")
    # gaps shrink like phi^-n, so grow the horizon until two successive estimates agree
    n_steps = n0 + 20
    while True:
        e_norm, e_first = escape_rate_estimates(t, n_steps)
        e = e_first if first_coordinate else e_norm
        gaps = np.abs(np.diff(e[n0:]))
        hit = np.nonzero(gaps < tol)[0]
        if hit.size:
            return float(e[n0 + hit[0] + 1])
        if n_steps >= max_iter:
            raise ValueError(f"escape rate did not stabilise to tol={tol} within {max_iter} steps")
        n_steps = min(max_iter, 2 * n_steps)


def log_first_coordinate(t, n: int):
    """``(phase, log|pi f^n(t)|)`` without overflow for large ``n``."""
    for phase, log_first, _ in _log_orbit(t, n):
        pass
    return phase, log_first


def singularities():
    """The four conic singularities P_1..P_4 of the Cayley cubic I = 0."""
    return ((1.0, 1.0, 1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0))


def rho1_point(x):
    """Point (x, x/(2x-1), x) on the curve of period-two points through P_1; ``x`` may be an array."""
    if np.any(np.asarray(x) == 0.5):
        raise ValueError("rho_1 is undefined at x = 1/2")
    return (x, x / (2 * x - 1), x)  # exact when x is a Fraction


_SYMMETRIES = {
    "s": lambda x, y, z: (z, y, x),
    "s2": lambda x, y, z: (-x, -y, z),
    "s3": lambda x, y, z: (x, -y, -z),
    "s4": lambda x, y, z: (-x, y, -z),
}


def apply_symmetry(name: str, t):
    """Apply the reversing symmetry ``s`` or one of the symmetries ``s2, s3, s4``."""
    try:
        fn = _SYMMETRIES[name]
    except KeyError:
        raise ValueError(f"unknown symmetry {name!r}; expected one of {sorted(_SYMMETRIES)}") from None
    return fn(*t)


def differential(t) -> np.ndarray:
    """Jacobian of f at t."""
    x, y, _ = (float(c) for c in t)
    return np.array([[2 * y, 2 * x, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


def differential_power(t, n: int) -> np.ndarray:
    """Jacobian of f^n at t by the chain rule."""
    d = np.eye(3)
    for _ in range(n):
        d = differential(t) @ d
        t = apply_f(t)
    return d


def characteristic_polynomial(m: np.ndarray) -> np.ndarray:
    """Coefficients ``[1, c2, c1, c0]`` of det(lambda I - m) for a 3x3 matrix."""
    m = np.asarray(m, dtype=float)
    tr = np.trace(m)
    minors = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    return np.array([1.0, -tr, minors, -np.linalg.det(m)])


def unit_root_eigenvalues(m: np.ndarray):
    """Eigenvalues of a 3x3 matrix known to have eigenvalue 1, in closed form.

    The characteristic cubic is deflated by (lambda - 1) and the remaining
    quadratic solved directly.  Returns ``(1, lam_small, lam_large)`` ordered by
    modulus of the last two.
    """
    _, c2, c1, c0 = characteristic_polynomial(m)
    # lambda^3 + c2 lambda^2 + c1 lambda + c0 = (lambda - 1)(lambda^2 + b lambda + c)
    b = c2 + 1.0
    c = -c0
    disc = b * b - 4 * c
    root = np.sqrt(disc + 0j) if disc < 0 else math.sqrt(disc)
    # cancellation-free quadratic roots
    q = -0.5 * (b + math.copysign(1.0, b) * root) if disc >= 0 else -0.5 * (b + root)
    r1, r2 = q, c / q
    small, large = sorted((r1, r2), key=abs)
    return 1.0, small, large


def kernel_vector(m: np.ndarray, lam) -> np.ndarray:
    """A null vector of ``m - lam I`` (3x3, rank 2) from a cross product of rows."""
    a = np.asarray(m, dtype=complex if isinstance(lam, complex) else float) - lam * np.eye(3)
    best = None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        v = np.cross(a[i], a[j])
        if best is None or np.linalg.norm(v) > np.linalg.norm(best):
            best = v
    return best / np.linalg.norm(best)


def period_six_eigendata(a: float):
    """Stable eigenvalue and eigenvector of Df^6 at the period-six point (0, 0, a).

    Closed forms: eigenvalue ``-4a^2 sqrt(4a^4+1) + 8a^4 + 1`` with eigenvector
    ``(1, -(sqrt(4a^4+1) + 2a^2 - 1)/(2a), 0)``.
    """
    s = math.sqrt(4 * a**4 + 1)
    lam = -4 * a * a * s + 8 * a**4 + 1
    vec = np.array([1.0, -(s + 2 * a * a - 1) / (2 * a), 0.0])
    return lam, vec
