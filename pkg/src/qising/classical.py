"""Classical Fibonacci Ising ring: transfer matrices, partition functions and free energy.

Conventions: ``k_B = 1``, ``K_i = p_i / tau`` and ``h_i = q_i / tau``.  The
transfer matrix of site ``i`` is ``T_i[s', s] = exp(K_i s' s + h_i s)`` with the
spin ``+1`` on index 0, and ``Z = Tr(T_N ... T_1)`` (descending order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import tracemap
from .sequences import CouplingMap, as_word, fibonacci, modulate, rotation_word, substitution_word

BRUTE_FORCE_MAX_SITES = 20
MAX_LIMIT_GENERATION = 30


class ConvergenceError(RuntimeError):
    """A limit failed to stabilise; ``gap`` holds the last successive difference."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


@dataclass(frozen=True)
class ThermoParams:
    couplings: CouplingMap
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"temperature must be positive, got {self.tau}")

    def site_constants(self, w) -> tuple:
        """Arrays ``(K_i, h_i)`` along the word."""
        w = as_word(w)
        K = modulate(w, self.couplings.p).astype(float) / self.tau
        h = modulate(w, self.couplings.q).astype(float) / self.tau
        return K, h


@dataclass(frozen=True)
class FreeEnergyResult:
    value: float
    n_used: int
    cauchy_gap: float


def transfer_matrix(K, h) -> np.ndarray:
    """``[[e^(K+h), e^(-K-h)], [e^(-K+h), e^(K-h)]]``; broadcasts to shape ``(..., 2, 2)``."""
    K, h = np.broadcast_arrays(np.asarray(K, dtype=float), np.asarray(h, dtype=float))
    out = np.empty(K.shape + (2, 2))
    out[..., 0, 0] = np.exp(K + h)
    out[..., 0, 1] = np.exp(-K - h)
    out[..., 1, 0] = np.exp(-K + h)
    out[..., 1, 1] = np.exp(K - h)
    return out


@dataclass(frozen=True)
class ScaledMatrix:
    """The matrix ``m * exp(log_scale)``, with the largest |entry| of ``m`` kept at 1."""

    m: np.ndarray
    log_scale: float = 0.0

    @classmethod
    def of(cls, m, log_scale: float = 0.0) -> "ScaledMatrix":
        m = np.asarray(m, dtype=float)
        s = np.max(np.abs(m))
        if s == 0:
            return cls(m, -math.inf)
        return cls(m / s, log_scale + math.log(s))

    def __matmul__(self, other: "ScaledMatrix") -> "ScaledMatrix":
        return ScaledMatrix.of(self.m @ other.m, self.log_scale + other.log_scale)

    def to_array(self) -> np.ndarray:
        return self.m * math.exp(self.log_scale)

    def log_trace(self) -> float:
        return math.log(np.trace(self.m)) + self.log_scale

    def log_norm_max(self) -> float:
        return math.log(np.max(np.abs(self.m))) + self.log_scale

    def log_norm_sum(self) -> float:
        return math.log(np.sum(np.abs(self.m))) + self.log_scale


def _renormalise(mats: np.ndarray, logs: np.ndarray):
    s = np.max(np.abs(mats), axis=(-2, -1))
    return mats / s[:, None, None], logs + np.log(s)


def scaled_product(mats: np.ndarray) -> ScaledMatrix:
    """``mats[N-1] @ ... @ mats[0]`` by pairwise tree reduction with per-level rescaling."""
    mats = np.asarray(mats, dtype=float)
    if mats.ndim != 3 or mats.shape[0] == 0:
        raise ValueError("expected a non-empty stack of matrices")
    mats, logs = _renormalise(mats, np.zeros(len(mats)))
    while len(mats) > 1:
        n_pairs = len(mats) // 2
        later, earlier = mats[1 : 2 * n_pairs : 2], mats[0 : 2 * n_pairs : 2]
        prod = later @ earlier
        plog = logs[1 : 2 * n_pairs : 2] + logs[0 : 2 * n_pairs : 2]
        prod, plog = _renormalise(prod, plog)
        if len(mats) % 2:
            prod = np.concatenate([prod, mats[-1:]])
            plog = np.concatenate([plog, logs[-1:]])
        mats, logs = prod, plog
    return ScaledMatrix(mats[0], float(logs[0]))


def _fibonacci_product(gen: int, letter_mats) -> ScaledMatrix:
    """Product over ``substitution_word(gen)`` via ``M_k = M_(k-2) M_(k-1)``."""
    prev, cur = ScaledMatrix.of(letter_mats[1]), ScaledMatrix.of(letter_mats[0])  # words b, a
    for _ in range(gen - 1):
        prev, cur = cur, prev @ cur
    return cur


def transfer_product(w, t: ThermoParams) -> ScaledMatrix:
    """``T_N ... T_1`` along the word, overflow-free."""
    w = as_word(w)
    if len(w) == 0:
        raise ValueError("word must be non-empty")
    if w.generation is not None:
        c = t.couplings
        letters = transfer_matrix([c.p_a / t.tau, c.p_b / t.tau], [c.q_a / t.tau, c.q_b / t.tau])
        return _fibonacci_product(w.generation, letters)
    K, h = t.site_constants(w)
    return scaled_product(transfer_matrix(K, h))


def log_partition(w, t: ThermoParams) -> float:
    """``log Z`` of the periodic ring modulated by ``w``."""
    return transfer_product(w, t).log_trace()


def brute_force_partition(w, t: ThermoParams) -> float:
    """Exhaustive sum over the ``2^N`` spin configurations of the ring (``N <= 20``)."""
    w = as_word(w)
    n = len(w)
    if n == 0:
        raise ValueError("word must be non-empty")
    if n > BRUTE_FORCE_MAX_SITES:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_MAX_SITES} sites, got {n}")
    K, h = t.site_constants(w)
    total = 0.0
    chunk = 1 << min(n, 16)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        spins = 1 - 2 * ((codes[:, None] >> np.arange(n)) & 1).astype(float)
        energy = (spins * np.roll(spins, -1, axis=1)) @ K + spins @ h
        total += float(np.sum(np.exp(energy)))
    return total


def free_energy_finite(w, t: ThermoParams) -> float:
    """``-log Z / (N tau)``."""
    w = as_word(w)
    return -log_partition(w, t) / (len(w) * t.tau)


def free_energy_limit(
    c: CouplingMap,
    tau: float,
    tol: float = 1e-10,
    offset: float = 0.0,
    k_min: int = 3,
    k_max: int = MAX_LIMIT_GENERATION,
) -> FreeEnergyResult:
    """Thermodynamic-limit free energy along rotation words of Fibonacci length.

    ``N`` runs through ``F_k_min, F_(k_min+1), ...`` until two successive finite
    free energies differ by less than ``tol``.  Raises
    :class:`ConvergenceError` carrying the last gap when ``F_k_max`` is reached.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not 2 <= k_min <= k_max <= MAX_LIMIT_GENERATION:
        raise ValueError(f"need 2 <= k_min <= k_max <= {MAX_LIMIT_GENERATION}")
    t = ThermoParams(c, tau)
    prev, gap = None, math.inf
    for k in range(k_min, k_max + 1):
        n = fibonacci(k)
        w = substitution_word(k) if offset == 0.0 else rotation_word(n, offset)
        value = free_energy_finite(w, t)
        if prev is not None:
            gap = abs(value - prev)
            if gap < tol:
                return FreeEnergyResult(value, n, gap)
        prev = value
    raise ConvergenceError(f"free energy not converged to {tol} by N = F_{k_max}; last gap {gap:.3e}", gap)


def free_energy_at(c: CouplingMap, tau: float, k: int, offset: float = 0.0) -> FreeEnergyResult:
    """Finite free energy at ``N = F_k`` with the gap to ``N = F_(k-1)``."""
    t = ThermoParams(c, tau)
    vals = [free_energy_finite(rotation_word(fibonacci(j), offset), t) for j in (k - 1, k)]
    return FreeEnergyResult(vals[1], fibonacci(k), abs(vals[1] - vals[0]))


def pure_closed_form(K: float, h: float, tau: float) -> float:
    """``-log(lambda_max) / tau`` for the constant chain, from the 2x2 eigenvalue formula."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if not tau > 0:
        raise ValueError("tau must be positive")
    lam = math.exp(K) * math.cosh(h) + math.sqrt(math.exp(2 * K) * math.sinh(h) ** 2 + math.exp(-2 * K))
    return -math.log(lam) / tau


def initial_half_traces(t: ThermoParams) -> tuple:
    """``(x_1, x_2, x_3)``: half-traces of the normalised products over prefixes of length 1, 2, 3."""
    w = substitution_word(3)  # "aba"
    K, h = t.site_constants(w)
    if np.any(K == 0):
        raise ValueError("degenerate transfer matrix: K_i = 0 gives det T_i = 0")
    mats = transfer_matrix(K, h) / np.sqrt(2 * np.sinh(2 * K))[:, None, None]
    p1 = mats[0]
    p2 = mats[1] @ p1
    p3 = mats[2] @ p2
    return tuple(0.5 * float(np.trace(p)) for p in (p1, p2, p3))


def trace_identity_check(k: int, t: ThermoParams) -> tuple:
    """Both sides of ``log Tr T^(F_k) = sum log d_i + log 2 + log|pi f^(k-3)(x_3, x_2, x_1)|``.

    ``d_i = sqrt(det T_i) = sqrt(2 sinh 2K_i)``.  Returns ``(lhs, rhs)``.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    w = substitution_word(k)
    K, _ = t.site_constants(w)
    if np.any(K <= 0):
        raise ValueError("degenerate transfer matrix: K_i = 0 gives det T_i = 0")
    lhs = log_partition(w, t)
    x1, x2, x3 = initial_half_traces(t)
    _, log_x = tracemap.log_first_coordinate((x3, x2, x1), k - 3)
    log_d = 0.5 * np.log(2 * np.sinh(2 * K))
    rhs = float(np.sum(log_d)) + math.log(2.0) + log_x
    return lhs, rhs


def free_energy_curve(c: CouplingMap, taus: Iterable[float], tol: float, offset: float = 0.0) -> list:
    """``free_energy_limit`` over a temperature grid."""
    return [free_energy_limit(c, float(tau), tol, offset) for tau in taus]


__all__ = [
    "ConvergenceError",
    "ThermoParams",
    "FreeEnergyResult",
    "ScaledMatrix",
    "transfer_matrix",
    "scaled_product",
    "transfer_product",
    "log_partition",
    "brute_force_partition",
    "free_energy_finite",
    "free_energy_limit",
    "free_energy_at",
    "pure_closed_form",
    "initial_half_traces",
    "trace_identity_check",
    "free_energy_curve",
]
