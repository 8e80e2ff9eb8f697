import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from goldbach_lab import arith, ladder as ld
from goldbach_lab.errors import DomainError, VerificationFailure

import frozen
import oracles


# --- binary splits --------------------------------------------------------------

def test_binary_examples():
    assert ld.binary_check(4) == (2, 2)
    assert ld.binary_check(100) == (3, 97)
    with pytest.raises(DomainError):
        ld.binary_check(7)
    with pytest.raises(DomainError):
        ld.binary_check(2)


def test_large_binary_instance():
    n, p1, p2 = frozen.BINARY_INSTANCE
    assert ld.certify_pair(n, p1, p2)
    assert oracles.is_prime_strong(p1) and oracles.is_prime_strong(p2)
    assert not ld.certify_pair(n, p1 + 2, p2 - 2)


def test_binary_table_minimal_split():
    table = ld.binary_table(5000)
    for m in range(4, 5001, 2):
        p = int(table[m])
        assert oracles.is_prime_trial(p) and oracles.is_prime_trial(m - p)
        assert not any(oracles.is_prime_trial(r) and oracles.is_prime_trial(m - r) for r in range(2, p))


@given(st.integers(2, 5 * 10**9))
def test_binary_check_property(k):
    n = 2 * k
    p1, p2 = ld.binary_check(n)
    assert p1 + p2 == n and arith.is_prime(p1) and arith.is_prime(p2) and p1 <= p2


# --- Proth ----------------------------------------------------------------

def test_proth_examples():
    assert ld.proth_test(3, 2).is_prime  # 13
    assert ld.proth_test(1, 4).is_prime  # 17
    r = ld.proth_test(3, 4)  # 49 = 7^2
    assert r.status == "composite"
    assert ld.proth_test(13, 6).status == "composite"  # 833 = 7^2 * 17
    with pytest.raises(DomainError):
        ld.proth_test(17, 4)


def test_proth_agrees_with_miller_rabin_below_1e9():
    nums = ld.proth_numbers(3, 10**9)
    assert all(ld.is_proth(N) for N, _, _ in nums)
    for N, k, m in nums:
        res = ld.proth_test(k, m)
        assert res.status != "inconclusive", N
        assert res.is_prime == arith.is_prime(N), N


def test_proth_numbers_enumeration():
    expected = [N for N in range(3, 2000) if ld.is_proth(N)]
    assert [N for N, _, _ in ld.proth_numbers(3, 2000)] == expected
    brute = set()
    for m in range(1, 12):
        for k in range(1, 1 << m, 2):
            if k * (1 << m) + 1 < 2000:
                brute.add(k * (1 << m) + 1)
    assert set(expected) == brute


# --- ladder ---------------------------------------------------------------

def test_ladder_frozen_small():
    lad = ld.build_ladder(100, 20)
    assert lad.primes.tolist() == frozen.LADDER_100_20


@given(st.integers(7, 200_000), st.integers(100, 5000))
def test_ladder_invariants(limit, gap):
    # every prime gap below 2e5 is at most 86, so a window of width gap - 4 >= 96 always holds a prime
    lad = ld.build_ladder(limit, gap)
    lad.check(certify=True)
    p = lad.primes
    assert p[0] == 3 and p[-1] >= limit
    gaps = np.diff(p)
    assert gaps.min() >= 4 and gaps.max() <= gap


def test_ladder_rejects_narrow_gap():
    with pytest.raises(DomainError):
        ld.build_ladder(1000, 6)
    # 113 -> 127 is a prime gap of 14, so rungs spaced at most 8 apart cannot pass it
    with pytest.raises(VerificationFailure):
        ld.build_ladder(200, 8)


def test_ladder_round_trip_and_tamper(tmp_path):
    lad = ld.build_ladder(10**5, 200)
    path = tmp_path / "l.bin"
    lad.save(path)
    back = ld.Ladder.load(path, certify=True)
    assert np.array_equal(back.primes, lad.primes) and back.digest == lad.digest
    raw = bytearray(path.read_bytes())
    raw[-8] ^= 2
    path.write_bytes(bytes(raw))
    with pytest.raises(VerificationFailure):
        ld.Ladder.load(path)


def test_ladder_check_catches_bad_gap():
    lad = ld.Ladder(np.array([3, 5, 11]), 20, 10)
    with pytest.raises(VerificationFailure):
        lad.check()


# --- ternary witnesses ---------------------------------------------------------

def test_ternary_examples():
    lad = ld.build_ladder(1000, 20)
    w = ld.ternary_verify(7, lad)
    assert (w.p, w.p1, w.p2) == (3, 2, 2)
    w = ld.ternary_verify(9, lad)
    assert w.validate() and w.n - w.p != 2
    rung = int(lad.primes[5])
    w = ld.ternary_verify(rung + 2, lad)
    assert w.p == int(lad.primes[4]) and w.validate()


@given(st.integers(3, 5 * 10**5))
def test_ternary_witness_property(k):
    lad = _shared_ladder()
    n = 2 * k + 1
    w = ld.ternary_verify(n, lad)
    assert w.validate()
    assert 4 <= n - w.p <= lad.max_gap + 2 and (n - w.p) % 2 == 0


_LADDER_CACHE = {}


def _shared_ladder():
    if "l" not in _LADDER_CACHE:
        _LADDER_CACHE["l"] = ld.build_ladder(10**6 + 1, 1000)
    return _LADDER_CACHE["l"]


def test_verify_range_examples():
    lad = ld.build_ladder(10**5, 1000)
    s = ld.verify_range(7, 9, lad)
    assert s.verified == 2
    s = ld.verify_range(7, 10**5 - 1, lad, spot_check=100)
    assert s.verified == (10**5 - 1 - 7) // 2 + 1
    assert s.spot_checks == 100


def test_verify_range_rejects_bad_input():
    lad = ld.build_ladder(1000, 50)
    with pytest.raises(DomainError):
        ld.verify_range(8, 99, lad)
    with pytest.raises(DomainError):
        ld.verify_range(7, 2001, lad)


def test_verify_range_resume_identical(tmp_path):
    lad = _shared_ladder()
    full = ld.verify_range(7, 10**6 + 1, lad, chunk=1 << 15)
    ck = tmp_path / "ck.json"
    part = ld.verify_range(7, 10**6 + 1, lad, checkpoint=ck, chunk=1 << 15, stop_after=3)
    assert part.verified < full.verified
    assert json.loads(ck.read_text())["next"] > 7
    resumed = ld.verify_range(7, 10**6 + 1, lad, checkpoint=ck, chunk=1 << 15)
    assert resumed.to_dict() == full.to_dict()
    again = ld.verify_range(7, 10**6 + 1, lad, checkpoint=ck, chunk=1 << 15)
    assert again.to_dict() == full.to_dict()


def test_verify_range_workers_identical():
    lad = _shared_ladder()
    a = ld.verify_range(7, 10**6 + 1, lad, chunk=1 << 16, workers=1)
    b = ld.verify_range(7, 10**6 + 1, lad, chunk=1 << 16, workers=3)
    assert a.to_json() == b.to_json()


def test_witness_csv(tmp_path):
    lad = ld.build_ladder(1000, 50)
    count = ld.write_witnesses_csv(7, 99, lad, tmp_path / "w.csv")
    rows = (tmp_path / "w.csv").read_text().splitlines()
    assert count == 47 and rows[0] == "n,p,p1,p2" and len(rows) == 48
    for row in rows[1:]:
        n, p, p1, p2 = map(int, row.split(","))
        assert ld.TernaryWitness(n, p, p1, p2).validate()
