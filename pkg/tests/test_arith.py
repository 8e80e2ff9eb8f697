import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from goldbach_lab import arith
from goldbach_lab.errors import DomainError, ResourceError

import oracles


# --- sieves -----------------------------------------------------------------

def test_sieve_range_small_examples():
    assert arith.sieve_range(2, 10).tolist() == [2, 3, 5, 7]
    assert arith.sieve_range(90, 100).tolist() == [97]


def test_sieve_range_near_1e9_matches_miller_rabin_scan():
    lo = 10**9
    got = arith.sieve_range(lo, lo + 100).tolist()
    expected = [n for n in range(lo, lo + 101) if oracles.is_prime_trial(n)]
    assert got == expected


def test_primes_upto_matches_trial_division():
    assert arith.primes_upto(5000).tolist() == oracles.primes_trial(5000)


@given(st.integers(2, 200_000), st.integers(0, 3000))
def test_sieve_segments_merge(lo, width):
    hi = lo + width
    whole = arith.sieve_range(lo, hi).tolist()
    mid = (lo + hi) // 2
    left = arith.sieve_range(lo, mid).tolist()
    right = arith.sieve_range(mid + 1, hi).tolist() if mid + 1 <= hi else []
    assert whole == left + right
    assert all(arith.is_prime(p) for p in whole)
    assert whole == sorted(set(whole))


def test_sieve_range_rejects_bad_range():
    with pytest.raises(DomainError):
        arith.sieve_range(10, 5)


def test_sieve_range_budget(monkeypatch):
    monkeypatch.setenv("GOLDBACH_LAB_BUDGET_MB", "1")
    with pytest.raises(ResourceError):
        arith.sieve_range(2, 10**9)


@given(st.integers(1, 10**6))
def test_is_prime_agrees_with_trial_division(n):
    assert arith.is_prime(n) == oracles.is_prime_trial(n)


# --- multiplicative functions -----------------------------------------------

def test_mangoldt_examples():
    assert arith.mangoldt(1) == 0.0
    assert arith.mangoldt(8) == pytest.approx(math.log(2), abs=1e-15)
    assert arith.mangoldt(6) == 0.0


def test_moebius_examples():
    assert [arith.moebius(n) for n in (1, 4, 6, 30)] == [1, 0, 1, -1]


def test_totient_examples():
    assert arith.totient(1) == 1
    assert arith.totient(12) == 4
    for p in (2, 3, 97, 7919):
        assert arith.totient(p) == p - 1


@given(st.integers(1, 3000))
def test_totient_and_mangoldt_match_oracles(n):
    assert arith.totient(n) == oracles.totient_trial(n)
    assert arith.mangoldt(n) == pytest.approx(oracles.mangoldt_trial(n), abs=1e-15)


def test_divisor_sum_of_mangoldt_is_log():
    N = 10**5
    lam = arith.mangoldt_array(N)
    acc = np.zeros(N + 1)
    for d in range(1, N + 1):
        if lam[d]:
            acc[d::d] += lam[d]
    n = np.arange(1, N + 1)
    assert np.max(np.abs(acc[1:] - np.log(n))) < 1e-9


def test_divisor_sum_of_moebius_is_indicator():
    N = 10**5
    mu = arith.moebius_array(N)
    acc = np.zeros(N + 1, dtype=np.int64)
    for d in range(1, N + 1):
        if mu[d]:
            acc[d::d] += mu[d]
    assert acc[1] == 1
    assert not np.any(acc[2:])


def test_arrays_match_scalar_functions():
    N = 2000
    mu = arith.moebius_array(N)
    phi = arith.totient_array(N)
    lam = arith.mangoldt_array(N)
    for n in range(1, N + 1):
        assert mu[n] == arith.moebius(n)
        assert phi[n] == arith.totient(n)
        assert lam[n] == pytest.approx(arith.mangoldt(n), abs=1e-15)


# --- rational approximation -------------------------------------------------

def test_best_approx_examples():
    r = arith.best_approx(0.5, 10)
    assert (r.a, r.q, r.delta) == (1, 2, 0.0)
    r = arith.best_approx(0.1415926535, 10)
    assert (r.a, r.q) == (1, 7)
    r = arith.best_approx(0.3, 100)
    assert (r.a, r.q) == (3, 10)


@given(st.floats(0, 1, exclude_max=True, allow_nan=False), st.integers(1, 10**7))
def test_best_approx_contract(alpha, Q):
    r = arith.best_approx(alpha, Q, x=1e6)
    assert 1 <= r.q <= Q
    assert math.gcd(r.a, r.q) == 1
    assert abs(Fraction(alpha) - Fraction(r.a, r.q)) * r.q * Q <= 1
    assert r.delta == float((Fraction(alpha) - Fraction(r.a, r.q)) * Fraction(1e6))


def test_best_approx_contract_bulk():
    rng = np.random.default_rng(7)
    for alpha, Q in zip(rng.random(10**4), rng.integers(1, 10**6, 10**4)):
        r = arith.best_approx(float(alpha), int(Q))
        assert r.q <= Q and r.satisfies()


def test_switch_approx_examples():
    exact = arith.best_approx(3 / 8, 10)
    again = arith.switch_approx(3 / 8, 10**6, exact)
    assert (again.a, again.q) == (3, 8)

    alpha = 1 / 7 + 1e-5
    cur = arith.best_approx(alpha, 10)
    assert (cur.a, cur.q) == (1, 7)
    kept = arith.switch_approx(alpha, 20, cur)
    assert (kept.a, kept.q) == (1, 7)
    moved = arith.switch_approx(alpha, 10**5, cur)
    assert Fraction(moved.a, moved.q) != Fraction(1, 7)
    # distinct fractions are at least 1/(q q') apart, which forces q' >= 1/(7 |1/7 - a'/q'|)
    assert abs(Fraction(1, 7) - Fraction(moved.a, moved.q)) * 7 * moved.q >= 1
    assert moved.satisfies()


@given(st.floats(0, 1, exclude_max=True, allow_nan=False), st.integers(1, 1000), st.integers(2, 1000))
def test_switch_approx_contract(alpha, Q, factor):
    cur = arith.best_approx(alpha, Q)
    new = arith.switch_approx(alpha, Q * factor, cur)
    assert new.q <= Q * factor and new.satisfies()
    if new.fraction != cur.fraction:
        assert abs(new.fraction - cur.fraction) * cur.q * new.q >= 1


def test_switch_approx_needs_larger_parameter():
    cur = arith.best_approx(0.2, 10)
    with pytest.raises(DomainError):
        arith.switch_approx(0.2, 5, cur)


# --- characters -------------------------------------------------------------

def test_characters_examples():
    (triv,) = arith.characters_mod(1)
    assert triv(5) == 1 and triv(0) == 1
    chars3 = arith.characters_mod(3)
    assert len(chars3) == 2
    nonprincipal = [c for c in chars3 if not c.is_principal]
    assert len(nonprincipal) == 1 and nonprincipal[0](2) == pytest.approx(-1)
    chars5 = arith.characters_mod(5)
    assert len(chars5) == 4
    for c in chars5:
        if not c.is_principal:
            assert abs(sum(c(n) for n in range(5))) < 1e-12


def test_characters_orthogonality_up_to_200():
    for q in range(1, 201):
        chars = arith.characters_mod(q)
        phi = arith.totient(q)
        assert len(chars) == phi
        M = np.array([c.values() for c in chars])  # rows: characters, columns: residues
        rows = M @ M.conj().T
        assert np.max(np.abs(rows - phi * np.eye(phi))) < 1e-12 * max(1, phi)
        units = [n for n in range(q) if math.gcd(n, q) == 1]
        cols = M[:, units].conj().T @ M[:, units]
        assert np.max(np.abs(cols - phi * np.eye(len(units)))) < 1e-12 * max(1, phi)


@given(st.integers(2, 120), st.integers(0, 500), st.integers(0, 500))
def test_character_axioms(q, a, b):
    for chi in arith.characters_mod(q):
        assert chi(a) == pytest.approx(chi(a + q))
        assert chi(a * b) == pytest.approx(chi(a) * chi(b), abs=1e-12)
        assert (abs(chi(a)) < 1e-15) == (math.gcd(a, q) != 1)
        assert q % chi.conductor == 0


def test_conductors_of_known_characters():
    conds = sorted(c.conductor for c in arith.characters_mod(12))
    assert conds == [1, 3, 4, 12]
    assert sum(c.primitive for c in arith.characters_mod(8)) == 2


def test_characters_over_limit():
    with pytest.raises(ResourceError):
        arith.characters_mod(20_000)
