import numpy as np
import pytest

from qising.roots import RootFindingError, polynomial_roots


def close_as_sets(a, b, tol):
    a, b = np.asarray(a), np.asarray(b)
    return len(a) == len(b) and all(np.min(np.abs(b - z)) < tol for z in a)


@pytest.mark.parametrize("method", ["aberth", "durand-kerner"])
def test_known_roots(method):
    roots = np.array([1, -2, 0.5 + 1j, 0.5 - 1j, 3j])
    coeffs = np.poly(roots)
    assert close_as_sets(polynomial_roots(coeffs, method), roots, 1e-10)


@pytest.mark.parametrize("method", ["aberth", "durand-kerner"])
def test_roots_of_unity(method):
    n = 24
    coeffs = np.zeros(n + 1)
    coeffs[0], coeffs[-1] = 1, -1
    r = polynomial_roots(coeffs, method)
    assert np.allclose(np.abs(r), 1, atol=1e-12)
    assert np.allclose(np.sort(np.angle(r ** n)), 0, atol=1e-9)


def test_leading_and_trailing_zeros():
    r = polynomial_roots([0, 0, 1, -3, 2, 0, 0])
    assert close_as_sets(r, [1, 2, 0, 0], 1e-12)


def test_linear_and_degenerate():
    assert np.allclose(polynomial_roots([2, -4]), [2])
    with pytest.raises(ValueError):
        polynomial_roots([5])
    with pytest.raises(ValueError):
        polynomial_roots([1, 2, 3], method="newton")


def test_agrees_with_companion_matrix_on_random_polynomials():
    rng = np.random.default_rng(7)
    for deg in (5, 12, 26):
        c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
        ref = np.linalg.eigvals(np.diag(np.ones(deg - 1), -1) - np.vstack([c[1:] / c[0], np.zeros((deg - 1, deg))]))
        assert close_as_sets(polynomial_roots(c), ref, 1e-8)


def test_iteration_cap_raises():
    with pytest.raises(RootFindingError):
        polynomial_roots(np.poly(np.arange(1, 15)), max_iter=2)
