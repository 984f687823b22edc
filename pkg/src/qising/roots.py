"""Simultaneous polynomial root finding (Aberth-Ehrlich and Durand-Kerner iterations)."""

from __future__ import annotations

import numpy as np


class RootFindingError(RuntimeError):
    pass


def _horner(coeffs: np.ndarray, z: np.ndarray):
    """Value and derivative of the polynomial (highest degree first) at each ``z``."""
    p = np.full_like(z, coeffs[0])
    dp = np.zeros_like(z)
    for c in coeffs[1:]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(coeffs: np.ndarray) -> np.ndarray:
    n = len(coeffs) - 1
    # the geometric mean of the root moduli is |c_0 / c_n|^(1/n)
    radius = abs(coeffs[-1] / coeffs[0]) ** (1.0 / n) if coeffs[-1] != 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4  # offset breaks real-axis symmetry
    return radius * np.exp(1j * angles)


def polynomial_roots(coeffs, method: str = "aberth", tol: float = 1e-13, max_iter: int = 2000) -> np.ndarray:
    """All complex roots of ``c[0] z^n + ... + c[n]``.

    ``method`` is ``"aberth"`` (cubically convergent, the default) or
    ``"durand-kerner"``.  Iteration stops once every correction is below
    ``tol`` relative to its root; each root then gets two Newton polishing
    steps on the original polynomial.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if len(c) < 2:
        raise ValueError("polynomial must have degree >= 1")
    n_zero = len(c) - len(np.trim_zeros(c, "b"))
    c = np.trim_zeros(c, "b")
    zeros = np.zeros(n_zero, dtype=complex)
    if len(c) < 2:
        return zeros
    c = c / c[0]
    n = len(c) - 1
    if n == 1:
        return np.concatenate([[-c[1]], zeros])
    if method not in ("aberth", "durand-kerner"):
        raise ValueError(f"unknown method {method!r}")

    z = _initial_guesses(c)
    off = ~np.eye(n, dtype=bool)
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        diff = z[:, None] - z[None, :]
        if method == "aberth":
            p, dp = _horner(c, z)
            ratio = p / dp
            repulse = np.sum(np.where(off, 1.0 / np.where(off, diff, 1.0), 0.0), axis=1)
            step = ratio / (1.0 - ratio * repulse)
        else:
            p, _ = _horner(c, z)
            step = p / np.prod(np.where(off, diff, 1.0), axis=1)
        step = np.where(active, step, 0.0)
        z = z - step
        p, _ = _horner(c, z)
        active &= np.abs(p) > 8 * np.finfo(float).eps * _horner(np.abs(c), np.abs(z))[0]
        if not active.any() or np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            break
    else:
        raise RootFindingError(f"{method} iteration did not converge in {max_iter} steps")
    for _ in range(2):
        p, dp = _horner(c, z)
        ok = dp != 0
        z = np.where(ok, z - p / np.where(ok, dp, 1.0), z)
    return np.concatenate([z, zeros])
