import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qising import classical as cl
from qising.sequences import PHI, CouplingMap, Word, fibonacci, rotation_word, substitution_word


def thermo(pa=1.0, pb=1.5, qa=0.0, qb=0.0, tau=1.0):
    return cl.ThermoParams(CouplingMap(pa, pb, qa, qb), tau)


def test_transfer_matrix_examples():
    assert np.allclose(cl.transfer_matrix(0, 0), np.ones((2, 2)))
    m = cl.transfer_matrix(1.0, 0.0)
    assert np.allclose(m, m.T) and np.trace(m) == pytest.approx(2 * math.e)
    for K, h in [(0.3, 0.2), (1.7, 0.0), (0.05, 2.0)]:
        m = cl.transfer_matrix(K, h)
        assert np.linalg.det(m) == pytest.approx(2 * math.sinh(2 * K))
        assert np.all(m > 0)


def test_brute_force_small_cases():
    K, h = 0.7, 0.3
    t = cl.ThermoParams(CouplingMap(K, K, h, h), 1.0)
    assert cl.brute_force_partition("a", t) == pytest.approx(2 * math.exp(K) * math.cosh(h))
    expected = math.exp(2 * K + 2 * h) + math.exp(2 * K - 2 * h) + 2 * math.exp(-2 * K)
    assert cl.brute_force_partition("aa", t) == pytest.approx(expected)
    with pytest.raises(ValueError):
        cl.brute_force_partition(Word(np.zeros(21)), t)


def test_zero_coupling_partition():
    # K -> 0, h = 0: every configuration has weight one
    t = cl.ThermoParams(CouplingMap(1e-300, 1e-300), 1.0)
    for n in (1, 5, 9):
        assert cl.log_partition(Word(np.zeros(n)), t) == pytest.approx(n * math.log(2))
        assert cl.free_energy_finite(Word(np.zeros(n)), t) == pytest.approx(-math.log(2))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.sampled_from("ab"), min_size=1, max_size=12).map("".join),
    st.floats(0.01, 2), st.floats(0.01, 2), st.floats(0, 2), st.floats(0, 2), st.floats(0.3, 5),
)
def test_log_partition_matches_brute_force(word, Ka, Kb, ha, hb, tau):
    t = cl.ThermoParams(CouplingMap(Ka * tau, Kb * tau, ha * tau, hb * tau), tau)
    z = cl.brute_force_partition(word, t)
    assert math.exp(cl.log_partition(word, t)) == pytest.approx(z, rel=1e-10)
    assert z > 0


def test_norm_sandwich_in_unscaled_arithmetic():
    rng = np.random.default_rng(11)
    for n in range(1, 31):
        w = Word(rng.integers(0, 2, n))
        t = thermo(0.4, 0.9, 0.1, 0.2, 1.7)
        K, h = t.site_constants(w)
        prod = np.eye(2)
        for m in cl.transfer_matrix(K, h):
            prod = m @ prod
        assert np.abs(prod).max() <= np.trace(prod) <= np.abs(prod).sum()
        sm = cl.transfer_product(w, t)
        assert sm.log_norm_max() <= sm.log_trace() <= sm.log_norm_sum() + 1e-12


def test_scaled_product_matches_unscaled():
    rng = np.random.default_rng(2)
    mats = cl.transfer_matrix(rng.uniform(0, 1, 25), rng.uniform(0, 1, 25))
    prod = np.eye(2)
    for m in mats:
        prod = m @ prod
    assert np.allclose(cl.scaled_product(mats).to_array(), prod, rtol=1e-12)


def test_scaled_matrix_stays_normalised():
    s = cl.ScaledMatrix.of(np.array([[4.0, 1.0], [2.0, 8.0]]))
    assert np.abs(s.m).max() == 1.0
    assert np.allclose(s.to_array(), [[4, 1], [2, 8]])


def test_long_products_do_not_overflow():
    t = thermo(2.0, 3.0, 1.0, 0.5, 0.3)
    w = substitution_word(27)  # 317811 sites
    lz = cl.log_partition(w, t)
    assert math.isfinite(lz) and lz > 0
    plain = Word(w.bits.copy())  # untagged path: tree reduction over all sites
    assert cl.log_partition(plain, t) == pytest.approx(lz, rel=1e-12)


def test_free_energy_examples():
    t = cl.ThermoParams(CouplingMap(1e-300, 1e-300), 2.0)
    assert cl.free_energy_finite("abaab", t) == pytest.approx(-math.log(2) / 2)
    t = thermo(1.0, 1.0, tau=1.0)
    expected = -0.5 * math.log(2 * math.exp(2) + 2 * math.exp(-2))
    assert cl.free_energy_finite("aa", t) == pytest.approx(expected)


@pytest.mark.parametrize("tau", [0.3, 1.0, 4.0])
@pytest.mark.parametrize("q", [0.0, 0.7])
def test_free_energy_negative_and_offset_free(tau, q):
    c = CouplingMap(1.0, 2.0, q, 0.0)
    r0 = cl.free_energy_limit(c, tau, tol=1e-9)
    r1 = cl.free_energy_limit(c, tau, tol=1e-9, offset=0.618)
    assert r0.value < 0 and r1.value < 0
    assert abs(r0.value - r1.value) < 10 * 1e-9 + r0.cauchy_gap + r1.cauchy_gap
    assert 0 <= r0.cauchy_gap < 1e-9


def test_free_energy_limit_errors():
    c = CouplingMap(1.0, 2.0)
    with pytest.raises(cl.ConvergenceError) as info:
        cl.free_energy_limit(c, 1.0, tol=1e-30, k_max=8)
    assert info.value.gap > 0
    with pytest.raises(ValueError):
        cl.free_energy_limit(c, 1.0, tol=0)


def test_cauchy_gaps_shrink():
    t = thermo(1.0, 2.0, tau=1.0)
    vals = [cl.free_energy_finite(substitution_word(k), t) for k in range(6, 20)]
    gaps = np.abs(np.diff(vals))
    assert np.all(gaps[4:] < gaps[:-4])


@pytest.mark.parametrize("K, h, tau", [(0.5, 0.0, 1.0), (1.2, 0.4, 0.7), (0.1, 1.5, 3.0)])
def test_pure_closed_form(K, h, tau):
    m = cl.transfer_matrix(K, h)
    lam = np.linalg.eigvals(m).real.max()
    assert cl.pure_closed_form(K, h, tau) == pytest.approx(-math.log(lam) / tau)
    if h == 0:
        assert cl.pure_closed_form(K, 0, tau) == pytest.approx(-math.log(2 * math.cosh(K)) / tau)
    c = CouplingMap(K * tau, K * tau, h * tau, h * tau)
    assert cl.free_energy_limit(c, tau).value == pytest.approx(cl.pure_closed_form(K, h, tau), abs=1e-8)


def test_pure_closed_form_zero_coupling():
    assert cl.pure_closed_form(0.0, 0.0, 2.0) == pytest.approx(-math.log(2) / 2)
    with pytest.raises(ValueError):
        cl.pure_closed_form(-1, 0, 1)


@pytest.mark.parametrize("k", range(3, 13))
def test_trace_identity(k):
    for t in (thermo(1.0, 1.5, 0.2, 0.1, 1.3), thermo(0.3, 2.0, 1.0, 0.0, 0.8)):
        lhs, rhs = cl.trace_identity_check(k, t)
        assert abs(lhs - rhs) < 1e-8 * abs(lhs)


def test_trace_identity_needs_k3():
    with pytest.raises(ValueError):
        cl.trace_identity_check(2, thermo())


def test_determinant_exponent_and_fibonacci_ratio():
    t = thermo(0.7, 1.9, tau=1.1)
    K, _ = t.site_constants(substitution_word(25))
    mean = float(np.mean(0.5 * np.log(2 * np.sinh(2 * K))))
    d = [0.5 * math.log(2 * math.sinh(2 * k)) for k in (0.7 / 1.1, 1.9 / 1.1)]
    assert mean == pytest.approx(d[0] / PHI + d[1] / (1 + PHI), abs=1e-9)
    assert fibonacci(40) / PHI**40 == pytest.approx(PHI / math.sqrt(5), rel=1e-12)


def test_offset_words_give_the_same_limit():
    c = CouplingMap(0.5, 1.5, 0.2, 0.4)
    vals = [cl.free_energy_at(c, 1.0, 18, o).value for o in (0.0, 0.1, 0.5, 0.9)]
    assert np.ptp(vals) < 1e-4


def test_free_energy_curve():
    out = cl.free_energy_curve(CouplingMap(1.0, 1.2), [0.5, 1.0, 2.0], 1e-9)
    assert [r.value < 0 for r in out] == [True] * 3
    assert out[0].value < out[1].value < out[2].value


def test_rotation_and_substitution_words_agree_on_z():
    t = thermo(0.9, 1.4, 0.3, 0.3, 1.0)
    for k in (5, 9, 13):
        assert cl.log_partition(rotation_word(fibonacci(k)), t) == pytest.approx(
            cl.log_partition(substitution_word(k), t), rel=1e-12
        )
