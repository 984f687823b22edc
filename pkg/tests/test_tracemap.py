import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qising import tracemap as tm
from qising.sequences import PHI

coord = st.floats(-3, 3, allow_nan=False)
triples = st.tuples(coord, coord, coord)


def test_apply_f_examples():
    assert tm.apply_f((1.0, 1.0, 1.0)) == (1.0, 1.0, 1.0)
    assert tm.apply_f((-1.0, -1.0, 1.0)) == (1.0, -1.0, -1.0)
    assert tm.apply_f((0.0, 0.0, 5.0)) == (-5.0, 0.0, 0.0)


def test_apply_f_inv_examples():
    back = tm.apply_f_inv(tm.apply_f((0.3, 0.7, -0.2)))
    assert np.allclose(back, (0.3, 0.7, -0.2), atol=1e-15)
    assert tm.apply_f_inv((1.0, 1.0, 1.0)) == (1.0, 1.0, 1.0)
    assert tm.apply_f_inv((1.0, -1.0, -1.0)) == (-1.0, -1.0, 1.0)


def test_apply_f_saturates_instead_of_overflowing():
    x = tm.apply_f((1e200, 1e200, 0.0))[0]
    assert math.isfinite(x) and x == tm.SATURATION


@settings(max_examples=200, deadline=None)
@given(triples)
def test_inverse_identity(t):
    for a, b in zip(tm.apply_f_inv(tm.apply_f(t)), t):
        assert a == pytest.approx(b, abs=1e-12 * max(1, abs(b)) * 40)
    for a, b in zip(tm.apply_f(tm.apply_f_inv(t)), t):
        assert a == pytest.approx(b, abs=1e-12 * max(1, abs(b)) * 40)


def test_fricke_vogt_examples():
    assert tm.fricke_vogt((1, 1, 1)) == 0
    assert tm.fricke_vogt((0, 0, 3.0)) == pytest.approx(8.0)
    assert tm.fricke_vogt((2, 3, 5)) == -23


def test_fricke_vogt_conserved_on_random_triples():
    rng = np.random.default_rng(0)
    t = tuple(rng.uniform(-3, 3, (3, 10_000)))
    i0 = tm.fricke_vogt(t)
    drift = np.abs(tm.fricke_vogt(tm.apply_f(t)) - i0)
    assert np.all(drift <= 1e-10 * np.maximum(1, np.abs(i0)))


def test_certified_escape_examples():
    assert tm.certified_escape((2, 2, 1))
    assert not tm.certified_escape((1, 1, 1))
    assert not tm.certified_escape((0.5, 10, 0))


def test_iterate_orbit_examples():
    r = tm.iterate_orbit((0.0, 0.0, 0.5), n_max=100)
    assert r.status == tm.BOUNDED and r.escape_index is None
    r = tm.iterate_orbit((2.0, 2.0, 1.0), n_max=100)
    assert r.status == tm.ESCAPED and r.escape_index == 0 and r.rate_estimate > 0


def test_rho1_orbit_is_bounded_in_exact_arithmetic():
    r = tm.iterate_orbit(tm.rho1_point(Fraction(2)), n_max=1000)
    assert r.status == tm.BOUNDED


def test_rho1_orbit_in_floats_is_unstable():
    # rounding pushes the saddle orbit onto its unstable direction
    r = tm.iterate_orbit(tm.rho1_point(2.0), n_max=1000)
    assert r.status == tm.ESCAPED and r.escape_index > 20


def test_iterate_orbit_magnitude_only_flag():
    # (0, 0, a) is period six for every a, so a large a stays outside the cone
    r = tm.iterate_orbit((0.0, 1e7, 0.0), n_max=50, bound=1e6, hard_cap=5)
    assert r.status == tm.ESCAPED and r.magnitude_only
    assert r.escape_index == 0


def test_iterate_orbit_rejects_bad_arguments():
    with pytest.raises(ValueError):
        tm.iterate_orbit((0, 0, 0), n_max=0)


def test_escape_time_matches_scalar_orbits():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-2, 2, (3, 200))
    times = tm.escape_time(tuple(pts), 30)
    for i in range(0, 200, 17):
        r = tm.iterate_orbit(tuple(pts[:, i]), n_max=30, bound=1e6, hard_cap=0)
        if r.status == tm.BOUNDED:
            assert times[i] == 31
        else:
            assert times[i] == r.escape_index


def test_escape_rate_examples():
    e = tm.escape_rate((10.0, 10.0, 0.0))
    assert e > 0
    coarse = tm.escape_rate((10.0, 10.0, 0.0), tol=1e-6)
    assert abs(coarse - e) < 1e-5
    with pytest.raises(ValueError, match="not escaping"):
        tm.escape_rate((1.0, 1.0, 1.0))


def test_escape_rate_first_coordinate_agrees():
    for t in [(10.0, 10.0, 0.0), (2.0, -3.0, 0.5), (-1.5, 2.5, 4.0)]:
        try:
            e = tm.escape_rate(t)
        except ValueError:
            continue
        assert tm.escape_rate(t, first_coordinate=True) == pytest.approx(e, abs=1e-10)


def test_escape_rate_handles_complex_starts():
    e = tm.escape_rate((3 + 1j, 3 - 0.5j, 0.2j))
    assert e > 0


def test_escape_rate_scales_under_iteration():
    # E(f(t)) = phi E(t)
    t = (2.0, 3.0, 1.0)
    assert tm.escape_rate(tm.apply_f(t)) == pytest.approx(PHI * tm.escape_rate(t), rel=1e-10)


def test_log_first_coordinate_matches_floats_for_small_n():
    t = (1.3, 1.2, 0.4)
    x = tm.iterate(t, 12)[0]
    phase, lx = tm.log_first_coordinate(t, 12)
    assert lx == pytest.approx(math.log(abs(x)), rel=1e-12)
    assert phase == pytest.approx(math.copysign(1.0, x))


def test_singularities():
    p1, p2, p3, p4 = tm.singularities()
    for p in (p1, p2, p3, p4):
        assert tm.fricke_vogt(p) == 0
    assert tm.apply_f(p1) == p1
    assert tm.apply_f(p2) == p3 and tm.apply_f(p3) == p4 and tm.apply_f(p4) == p2


def test_rho1_examples():
    assert tm.rho1_point(1.0) == (1.0, 1.0, 1.0)
    t = tm.rho1_point(Fraction(2))
    assert t == (2, Fraction(2, 3), 2)
    assert tm.iterate(t, 2) == t
    z = tm.rho1_point(0.0)
    assert z == (0.0, 0.0, 0.0) and tm.fricke_vogt(z) == -1
    with pytest.raises(ValueError):
        tm.rho1_point(0.5)


def test_symmetry_examples():
    assert tm.apply_symmetry("s", (1, 2, 3)) == (3, 2, 1)
    p1, p2, p3, p4 = tm.singularities()
    assert tm.apply_symmetry("s2", p1) == p2
    assert tm.apply_symmetry("s3", p1) == p3
    assert tm.apply_symmetry("s4", p1) == p4
    assert tm.apply_symmetry("s3", (1, 2, 3)) == (1, -2, -3)
    with pytest.raises(ValueError):
        tm.apply_symmetry("s5", (1, 2, 3))


@settings(max_examples=100, deadline=None)
@given(triples)
def test_symmetry_intertwining(t):
    f = tm.apply_f
    sym = tm.apply_symmetry
    for a, b in (("s2", "s3"), ("s3", "s4"), ("s4", "s2")):
        assert np.allclose(f(sym(a, t)), sym(b, f(t)), atol=1e-12)
    assert np.allclose(sym("s", f(sym("s", t))), tm.apply_f_inv(t), atol=1e-12)


@pytest.mark.parametrize("a", np.linspace(0.1, 10, 12))
def test_period_six_family(a):
    assert np.allclose(tm.iterate((0.0, 0.0, a), 6), (0.0, 0.0, a), atol=1e-12)
    assert tm.iterate((0, 0, Fraction(a)), 6) == (0, 0, Fraction(a))


def test_differential_determinant():
    rng = np.random.default_rng(1)
    for t in rng.uniform(-3, 3, (10, 3)):
        assert np.linalg.det(tm.differential(t)) == pytest.approx(-1.0)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_period_six_eigendata(a):
    d6 = tm.differential_power((0.0, 0.0, a), 6)
    lam, vec = tm.period_six_eigendata(a)
    assert np.allclose(d6 @ vec, lam * vec, atol=1e-9 * np.linalg.norm(d6))
    one, small, large = tm.unit_root_eigenvalues(d6)
    assert np.polyval(tm.characteristic_polynomial(d6), 1.0) == pytest.approx(0.0, abs=1e-8 * np.abs(d6).max())
    assert small == pytest.approx(lam, rel=1e-8)
    # det Df^6 = (-1)^6 = 1, so the other eigenvalue is 1/lambda
    assert large == pytest.approx(1 / lam, rel=1e-8)
    kv = tm.kernel_vector(d6, lam)
    assert abs(abs(kv @ vec) / np.linalg.norm(vec)) == pytest.approx(1.0, abs=1e-8)


def test_differential_power_matches_finite_differences():
    t = (0.3, -0.4, 0.9)
    d = tm.differential_power(t, 4)
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (np.array(tm.iterate(tuple(np.add(t, e)), 4)) - np.array(tm.iterate(tuple(np.subtract(t, e)), 4))) / (2 * h)
        assert np.allclose(fd, d[:, j], atol=1e-6)
