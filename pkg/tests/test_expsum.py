import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from goldbach_lab import arith, expsum, majorarc
from goldbach_lab import smoothing as sm
from goldbach_lab.errors import ResourceError

import frozen
import oracles


# --- s_eta --------------------------------------------------------------------

def test_psi_at_100():
    res = expsum.s_eta(sm.sharp(), 0.0, 100)
    assert res.value.real == pytest.approx(frozen.PSI_100, rel=1e-14)
    assert res.value.real == pytest.approx(oracles.psi_direct(100), rel=1e-14)
    assert res.terms == 25 + 10  # primes below 100 plus proper prime powers


@pytest.mark.parametrize("name", ["gaussian", "eta2", "eta_circ", "t2_gaussian"])
def test_alpha_zero_is_real(name):
    res = expsum.s_eta(sm.by_name(name), 0.0, 5000)
    assert abs(res.value.imag) <= 1e-12 * abs(res.value.real)


def test_order_independence_against_reversed_sum():
    eta = sm.gaussian()
    x = 1e4
    res = expsum.s_eta(eta, 0.5, x)
    ns, lam = arith.prime_powers_upto(int(9 * x))
    w = eta(ns / x)
    total = 0j
    for n, l, wt in zip(ns[::-1], lam[::-1], w[::-1]):
        if wt > 1e-15:
            total += l * wt * (-1) ** int(n)
    assert abs(res.value - total) <= 1e-9 * abs(total)


def test_s_eta_budget():
    with pytest.raises(ResourceError):
        expsum.s_eta(sm.sharp(), 0.1, 1e13)


@given(st.floats(-2, 2, allow_nan=False))
def test_triangle_inequality_and_trivial_bound(alpha):
    eta = sm.eta2()
    res = expsum.s_eta(eta, alpha, 3000)
    top = expsum.s_eta(eta, 0.0, 3000).value.real
    assert abs(res) <= res.trivial * (1 + 1e-12)
    assert abs(res) <= top * (1 + 1e-12)


@given(st.floats(0, 1, allow_nan=False), st.integers(-3, 3))
def test_periodic_in_alpha(alpha, shift):
    eta = sm.eta2()
    a = expsum.s_eta(eta, alpha, 2000).value
    b = expsum.s_eta(eta, alpha + shift, 2000).value
    assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_batch_agrees_with_single():
    eta = sm.gaussian()
    alphas = np.linspace(0, 1, 37)
    batch = expsum.s_eta_batch(eta, alphas, 2e4)
    single = np.array([expsum.s_eta(eta, a, 2e4).value for a in alphas])
    assert np.max(np.abs(batch - single)) <= 1e-9 * np.max(np.abs(single))


def test_rational_path_agrees():
    eta = sm.eta2()
    for a, q, beta in ((1, 3, 0.0), (2, 7, 3e-4), (5, 11, -1e-3)):
        r = expsum.s_eta_rational(eta, a, q, beta, 1e4).value
        d = expsum.s_eta(eta, a / q + beta, 1e4).value
        assert abs(r - d) <= 1e-9 * expsum.s_eta(eta, 0, 1e4).value.real


def test_major_arc_peaking():
    eta = sm.gaussian()
    x = 1e6
    rng = np.random.default_rng(11)
    median = float(np.median(np.abs(expsum.s_eta_batch(eta, rng.random(1000), x))))
    for q in (1, 2, 3, 5):
        for delta in (-4.0, -1.5, 0.0, 2.0, 4.0):
            a = 1
            val = abs(expsum.s_eta_rational(eta, a, q, delta / x, x))
            assert val >= 5 * median


# --- twisted sums and character expansion ------------------------------------

def test_trivial_character_reduces_to_s_eta():
    (triv,) = arith.characters_mod(1)
    eta = sm.eta2()
    for delta in (0.0, 1.3, -7.0):
        t = expsum.s_eta_chi(eta, triv, delta, 5000).value
        s = expsum.s_eta(eta, delta / 5000, 5000).value
        assert abs(t - s) <= 1e-12 * abs(s)


def test_twisted_sum_by_residue_classes():
    eta = sm.eta2()
    x = 1000
    (chi,) = [c for c in arith.characters_mod(3) if not c.is_principal]
    got = expsum.s_eta_chi(eta, chi, 0.0, x).value
    ns, lam = arith.prime_powers_upto(x)
    w = eta(ns / x)
    class_sums = {r: math.fsum(lam[(ns % 3) == r] * w[(ns % 3) == r]) for r in (1, 2)}
    expected = class_sums[1] - class_sums[2]
    assert got.real == pytest.approx(expected, rel=1e-12)
    assert abs(got.imag) < 1e-12 * abs(expected)


def test_real_characters_give_real_sums():
    eta = sm.eta2()
    for q in (4, 5, 8, 12):
        for chi in arith.characters_mod(q):
            val = expsum.s_eta_chi(eta, chi, 0.0, 2000).value
            if chi.order <= 2:
                assert abs(val.imag) <= 1e-12 * max(1.0, abs(val))


def test_linear_combination_examples():
    eta = sm.eta2()
    x = 1e4
    rep = expsum.linear_combination_check(eta, 0, 1, 2.5, x)
    assert rep.measured < (math.log(x) ** 2) * math.sqrt(x) / x * expsum.s_eta(eta, 0, x).value.real
    rep = expsum.linear_combination_check(eta, 1, 3, 0.0, x)
    assert rep.holds


def test_character_coefficients_small():
    eta = sm.eta2()
    for q in range(1, 51):
        a = next(a for a in range(1, q + 1) if math.gcd(a, q) == 1)
        rep = expsum.linear_combination_check(eta, a % q, q, 0.7, 3000)
        assert rep.extra["max_coefficient_ratio"] <= 1 + 1e-9
        assert rep.holds


# --- representation counts ---------------------------------------------------

def test_count_reps_examples():
    for n, count in frozen.ORDERED_TRIPLES.items():
        assert expsum.count_reps(n).unweighted == count
        assert oracles.count_triples_brute(n) == count


def test_count_reps_even_warns():
    with pytest.warns(expsum.EvenTargetWarning):
        rc = expsum.count_reps(10)
    assert "even" in rc.flags


def test_count_reps_limits():
    with pytest.raises(ResourceError):
        expsum.count_reps(10**4 + 1, method="brute")
    with pytest.raises(ResourceError):
        expsum.count_reps(10**7 + 1)


def test_rep_table_matches_brute():
    assert np.array_equal(expsum.rep_table(10**4), expsum.rep_table_brute(10**4))


@given(st.integers(3, 2000).map(lambda k: 2 * k + 1))
def test_count_reps_paths_agree(n):
    d = expsum.count_reps(n)
    b = expsum.count_reps(n, method="brute")
    assert d.unweighted == b.unweighted
    assert d.weighted == pytest.approx(b.weighted, rel=1e-6)
    assert (d.unweighted > 0) == (d.weighted > 0)


def test_weighted_count_with_smooth_weights():
    etas = (sm.eta2(), sm.eta2(), sm.eta2())
    n = 1501
    d = expsum.count_reps(n, "weighted", etas, x=800)
    b = expsum.count_reps(n, "weighted", etas, x=800, method="brute")
    assert d.weighted == pytest.approx(b.weighted, rel=1e-6)


# --- circle integrals --------------------------------------------------------

@pytest.mark.parametrize("name", ["sharp", "eta2", "eta_circ"])
def test_plancherel(name):
    eta = sm.sharp() if name == "sharp" else sm.by_name(name)
    rep = expsum.plancherel(eta, 1e5)
    assert rep.holds, rep.measured


def test_arc_integral_full_circle_equals_convolution():
    n = 2001
    x = n / 2
    plus, star = sm.eta2(), sm.eta1()
    full = expsum.arc_integral(plus, star, n, "full", x=x)
    ref = expsum.count_reps(n, "weighted", (plus, plus, star), x=x).weighted
    assert full.real == pytest.approx(ref, rel=1e-9)
    assert abs(full.imag) <= 1e-9 * ref


def test_arc_integral_empty_and_additive():
    n = 4001
    x = n / 2
    plus, star = sm.eta2(), sm.eta1()
    assert expsum.arc_integral(plus, star, n, []) == 0
    arcs = majorarc.build_major_arcs(3, 8, x)
    major = expsum.arc_integral(plus, star, n, arcs, x=x)
    minor = expsum.arc_integral(plus, star, n, arcs.complement(), x=x)
    full = expsum.arc_integral(plus, star, n, "full", x=x)
    assert abs(major + minor - full) <= 1e-6 * abs(full)


def test_count_reps_no_warning_for_odd():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        expsum.count_reps(101)
