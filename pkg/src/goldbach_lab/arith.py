"""Primes, arithmetic functions, Dirichlet characters and rational approximation.

Everything here is a pure function of its arguments.  Array-valued helpers
are cached because the exponential-sum and sieve modules ask for the same
tables many times.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce

import numpy as np

from .config import check_budget
from .errors import DomainError, ResourceError, UnsupportedError

# Deterministic Miller-Rabin: the first twelve primes as bases are proven
# correct for every n below this bound (it covers all 64-bit integers).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
MR_PROVEN_LIMIT = 3_317_044_064_679_887_385_961_981

SEGMENT_SIZE = 1 << 22
CHARACTER_LIMIT = 10_000


# ---------------------------------------------------------------------------
# primality and factoring


def is_prime(n: int) -> bool:
    """Deterministic primality test for ``n`` below :data:`MR_PROVEN_LIMIT`."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True
    if n >= MR_PROVEN_LIMIT:
        raise UnsupportedError(f"no proven Miller-Rabin base set for n = {n}")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        y = pow(a, d, n)
        if y == 1 or y == n - 1:
            continue
        for _ in range(s - 1):
            y = y * y % n
            if y == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (with a primality shortcut)."""
    n = int(n)
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    out: dict[int, int] = {}

    def strip(p: int) -> bool:
        nonlocal n
        if n % p:
            return False
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        return True

    strip(2)
    strip(3)
    f = 5
    prime_rest = n > 1 and n < MR_PROVEN_LIMIT and is_prime(n)
    while not prime_rest and f * f <= n:
        if strip(f) | strip(f + 2):
            prime_rest = n > 1 and n < MR_PROVEN_LIMIT and is_prime(n)
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def mangoldt(n: int) -> float:
    """log p if ``n`` is a power of the prime p, else 0."""
    n = int(n)
    if n < 1:
        raise DomainError("mangoldt needs n >= 1")
    if n == 1:
        return 0.0
    fac = factorize(n)
    if len(fac) != 1:
        return 0.0
    (p,) = fac
    return math.log(p)


def moebius(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError("moebius needs n >= 1")
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def totient(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError("totient needs n >= 1")
    out = n
    for p in factorize(n):
        out -= out // p
    return out


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise DomainError("jacobi needs odd positive n")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# sieves


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """The primes of the closed range [lo, hi] as an increasing int64 array."""

    lo: int
    hi: int
    primes: np.ndarray

    def __len__(self) -> int:
        return int(self.primes.size)

    def __iter__(self):
        return (int(p) for p in self.primes)

    def tolist(self) -> list[int]:
        return [int(p) for p in self.primes]


@lru_cache(maxsize=16)
def primes_upto(n: int) -> np.ndarray:
    """All primes <= n (plain sieve of odd numbers).  Returned array is read-only."""
    n = int(n)
    if n < 2:
        out = np.zeros(0, dtype=np.int64)
    else:
        check_budget(n // 2 + 1, "prime sieve")
        odd = np.ones(n // 2 + 1, dtype=bool)  # odd[i] <-> 2i+1
        odd[0] = False
        for i in range(1, (math.isqrt(n) - 1) // 2 + 1):
            if odd[i]:
                p = 2 * i + 1
                odd[p * p // 2 :: p] = False
        odd_primes = 2 * np.flatnonzero(odd) + 1
        odd_primes = odd_primes[odd_primes <= n]
        out = np.concatenate(([2], odd_primes)).astype(np.int64)
    out.flags.writeable = False
    return out


def sieve_range(lo: int, hi: int, segment: int = SEGMENT_SIZE) -> PrimeTable:
    """Exactly the primes in [lo, hi], by a segmented sieve of Eratosthenes.

    Segments are independent, so callers may split a range and concatenate
    the results.  The output array has to fit in the memory budget.
    """
    lo, hi = int(lo), int(hi)
    if lo < 2 or hi < lo:
        raise DomainError(f"sieve_range needs 2 <= lo <= hi, got ({lo}, {hi})")
    span = hi - lo + 1
    # rough size of the output plus one working segment
    est = 8 * int(span / max(math.log(max(lo, 3)), 1.0)) + min(span, segment)
    check_budget(est, "sieve_range")
    base = primes_upto(math.isqrt(hi))
    pieces = []
    for start in range(lo, hi + 1, segment):
        stop = min(start + segment - 1, hi)
        pieces.append(_sieve_segment(start, stop, base))
    return PrimeTable(lo, hi, np.concatenate(pieces) if pieces else np.zeros(0, np.int64))


def _sieve_segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    mark = np.ones(hi - lo + 1, dtype=bool)
    for p in base:
        p = int(p)
        if p * p > hi:
            break
        first = max(p * p, -(-lo // p) * p)
        mark[first - lo :: p] = False
    idx = np.flatnonzero(mark).astype(np.int64) + lo
    return idx[idx >= 2]


@lru_cache(maxsize=8)
def prime_powers_upto(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Prime powers m <= n in increasing order together with their Λ(m)."""
    n = int(n)
    ps = primes_upto(n)
    ns = [ps]
    lam = [np.log(ps.astype(np.float64))]
    small = ps[ps.astype(np.float64) ** 2 <= n]
    for p in small:
        p = int(p)
        pk = p * p
        extra = []
        while pk <= n:
            extra.append(pk)
            pk *= p
        ns.append(np.array(extra, dtype=np.int64))
        lam.append(np.full(len(extra), math.log(p)))
    allns = np.concatenate(ns)
    alllam = np.concatenate(lam)
    order = np.argsort(allns, kind="stable")
    allns, alllam = allns[order], alllam[order]
    allns.flags.writeable = False
    alllam.flags.writeable = False
    return allns, alllam


def mangoldt_array(n: int) -> np.ndarray:
    """Dense array with ``out[m] = Λ(m)`` for 0 <= m <= n."""
    check_budget(8 * (n + 1), "mangoldt_array")
    out = np.zeros(n + 1)
    ns, lam = prime_powers_upto(n)
    out[ns] = lam
    return out


@lru_cache(maxsize=4)
def moebius_array(n: int) -> np.ndarray:
    """Dense int8 array with ``out[m] = μ(m)`` for 0 <= m <= n (out[0] = 0)."""
    n = int(n)
    check_budget(9 * (n + 1), "moebius_array")
    mu = np.ones(n + 1, dtype=np.int8)
    prod = np.ones(n + 1, dtype=np.int64)
    for p in primes_upto(math.isqrt(n)):
        p = int(p)
        mu[::p] *= -1
        mu[:: p * p] = 0
        prod[::p] *= p
    # any leftover cofactor is a single prime above sqrt(n)
    idx = np.arange(n + 1, dtype=np.int64)
    mu[prod != idx] *= -1
    mu[0] = 0
    mu.flags.writeable = False
    return mu


@lru_cache(maxsize=4)
def totient_array(n: int) -> np.ndarray:
    n = int(n)
    check_budget(24 * (n + 1), "totient_array")
    phi = np.arange(n + 1, dtype=np.int64)
    rem = phi.copy()
    for p in primes_upto(math.isqrt(n)):
        p = int(p)
        phi[::p] -= phi[::p] // p
        pk = p
        while pk <= n:
            rem[::pk] //= p
            pk *= p
    big = rem > 1
    phi[big] -= phi[big] // rem[big]
    phi.flags.writeable = False
    return phi


# ---------------------------------------------------------------------------
# rational approximation


@dataclass(frozen=True)
class RationalApprox:
    """alpha = a/q + delta/x with |alpha - a/q| <= 1/(qQ).

    ``offset`` is the exact rational alpha - a/q (alpha is taken as the exact
    binary value of the float it was given), so ``delta`` can always be
    rebuilt as ``offset * x``.
    """

    a: int
    q: int
    Q: int
    alpha: float
    offset: Fraction
    x: float = 1.0

    @property
    def delta(self) -> float:
        return float(self.offset * Fraction(self.x))

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.a, self.q)

    def satisfies(self, Q: int | None = None) -> bool:
        Q = self.Q if Q is None else Q
        return abs(self.offset) * self.q * Q <= 1

    def at_scale(self, x: float) -> "RationalApprox":
        return RationalApprox(self.a, self.q, self.Q, self.alpha, self.offset, float(x))


def _convergents(value: Fraction):
    """Continued-fraction convergents of a rational, as (p, q) pairs."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = value.numerator, value.denominator
    while den:
        c, r = divmod(num, den)
        p0, q0, p1, q1 = p1, q1, c * p1 + p0, c * q1 + q0
        yield p1, q1
        num, den = den, r


def best_approx(alpha: float, Q: int, x: float = 1.0) -> RationalApprox:
    """Rational a/q with q <= Q and |alpha - a/q| <= 1/(qQ).

    Scans the continued-fraction convergents of alpha and returns the one
    with the smallest denominator meeting the condition.  The last
    convergent with q <= Q always meets it, so the scan cannot fail.
    """
    Q = int(Q)
    if Q < 1:
        raise DomainError("best_approx needs Q >= 1")
    exact = Fraction(alpha)
    for p, q in _convergents(exact):
        if q > Q:
            break
        if abs(exact - Fraction(p, q)) * q * Q <= 1:
            return RationalApprox(p, q, Q, float(alpha), exact - Fraction(p, q), float(x))
    raise AssertionError("continued fraction scan found no admissible convergent")


def switch_approx(alpha: float, Qprime: int, current: RationalApprox) -> RationalApprox:
    """Re-approximate alpha with the larger parameter ``Qprime``.

    The current fraction is kept whenever it is still admissible.
    Otherwise the new fraction is necessarily distinct, and distinct
    fractions are at least 1/(q q') apart; that separation is asserted.
    """
    if Qprime <= current.Q:
        raise DomainError("switch_approx needs Qprime > current.Q")
    exact = Fraction(alpha)
    old = Fraction(current.a, current.q)
    if abs(exact - old) * current.q * Qprime <= 1:
        return RationalApprox(current.a, current.q, int(Qprime), float(alpha), exact - old, current.x)
    new = best_approx(alpha, Qprime, current.x)
    if new.fraction != old:
        assert abs(old - new.fraction) * current.q * new.q >= 1
    return new


# ---------------------------------------------------------------------------
# Dirichlet characters


def root_of_unity(k, order: int) -> np.ndarray:
    """e(k/order) with exact values at the four quarter turns; k = -1 gives 0."""
    k = np.asarray(k, dtype=np.int64)
    kk = np.mod(k, order)
    out = np.exp(2j * np.pi * kk / order)
    quarter = (4 * kk) % order == 0
    if np.any(quarter):
        exact = np.array([1, 1j, -1, -1j])[(4 * kk[quarter]) // order]
        out = np.where(quarter, 0, out)
        out[quarter] = exact
    return np.where(k < 0, 0, out)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """A character mod ``modulus`` stored as exact root-of-unity indices.

    ``index[n mod q] = k`` means chi(n) = e(k/order); ``-1`` marks residues
    sharing a factor with the modulus (chi = 0 there).
    """

    modulus: int
    order: int
    index: np.ndarray
    conductor: int
    label: tuple = field(default=())

    @property
    def primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_principal(self) -> bool:
        return bool(np.all(self.index[self.index >= 0] == 0))

    @property
    def is_real(self) -> bool:
        k = self.index[self.index >= 0]
        return bool(np.all((2 * k) % self.order == 0))

    def index_of(self, n) -> np.ndarray:
        return self.index[np.mod(np.asarray(n, dtype=np.int64), self.modulus)]

    def __call__(self, n):
        v = root_of_unity(self.index_of(n), self.order)
        return complex(v) if np.ndim(v) == 0 else v

    def values(self) -> np.ndarray:
        return root_of_unity(self.index, self.order)

    def conj(self) -> "DirichletCharacter":
        idx = np.where(self.index >= 0, (-self.index) % self.order, -1)
        return DirichletCharacter(self.modulus, self.order, idx, self.conductor, self.label)

    def induced_primitive(self) -> "DirichletCharacter":
        """The primitive character mod the conductor that induces this one."""
        d, q = self.conductor, self.modulus
        idx = np.full(d, -1, dtype=np.int64)
        for r in range(d):
            if math.gcd(r, d) != 1:
                continue
            n = r
            while math.gcd(n, q) != 1:
                n += d
            idx[r] = self.index[n % q]
        if d == 1:
            idx[0] = 0
        return DirichletCharacter(d, self.order, idx, d, self.label)


def _primitive_root(m: int, p: int) -> int:
    """A generator of (Z/mZ)* for m = p^e with p an odd prime."""
    phi_p = p - 1
    qs = list(factorize(phi_p)) if phi_p > 1 else []
    for g in range(2, p + 1):
        if all(pow(g, phi_p // r, p) != 1 for r in qs):
            if m == p or pow(g, p - 1, p * p) != 1:
                return g
            return g + p
    return 1  # p == 2 never reaches here; p == 3 handled above


@lru_cache(maxsize=256)
def _local_components(p: int, e: int) -> list[tuple[int, np.ndarray]]:
    """Cyclic factors of (Z/p^e)* as (order, discrete-log table over residues mod p^e)."""
    m = p**e
    if p == 2:
        if e == 1:
            t = np.full(m, -1, dtype=np.int64)
            t[1] = 0
            return [(1, t)]
        if e == 2:
            t = np.array([-1, 0, -1, 1], dtype=np.int64)
            return [(2, t)]
        n5 = 2 ** (e - 2)
        ta = np.full(m, -1, dtype=np.int64)
        tb = np.full(m, -1, dtype=np.int64)
        v = 1
        for b in range(n5):
            ta[v], tb[v] = 0, b
            ta[m - v], tb[m - v] = 1, b
            v = v * 5 % m
        return [(2, ta), (n5, tb)]
    order = (p - 1) * p ** (e - 1)
    g = _primitive_root(m, p)
    t = np.full(m, -1, dtype=np.int64)
    v = 1
    for k in range(order):
        t[v] = k
        v = v * g % m
    return [(order, t)]


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def characters_mod(q: int, limit: int = CHARACTER_LIMIT) -> list[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, tagged with their conductors."""
    q = int(q)
    if q < 1:
        raise DomainError("characters_mod needs q >= 1")
    if q > limit:
        raise ResourceError(f"characters mod {q} exceed the configured limit {limit}")
    check_budget(8 * q * totient(q), "characters_mod")
    if q == 1:
        return [DirichletCharacter(1, 1, np.zeros(1, dtype=np.int64), 1, ())]
    residues = np.arange(q, dtype=np.int64)
    comps = []  # (prime, prime power, order, logs of every residue mod q)
    for p, e in sorted(factorize(q).items()):
        m = p**e
        for order, table in _local_components(p, e):
            comps.append((p, m, order, table[residues % m]))
    order_all = reduce(_lcm, (c[2] for c in comps), 1)
    unit = np.all([c[3] >= 0 for c in comps], axis=0)
    scaled = np.array([c[3] * (order_all // c[2]) for c in comps])

    primes = sorted({c[0] for c in comps})
    local_cond: dict[tuple, int] = {}
    out = []
    for exps in itertools.product(*[range(c[2]) for c in comps]):
        k = (np.asarray(exps, dtype=np.int64) @ scaled) % order_all
        idx = np.where(unit, k, -1)
        cond = 1
        for p in primes:
            sel = tuple((i, exps[i]) for i, c in enumerate(comps) if c[0] == p)
            key = (p,) + sel
            if key not in local_cond:
                local_cond[key] = _local_conductor(p, [comps[i] for i, _ in sel], [j for _, j in sel])
            cond *= local_cond[key]
        out.append(DirichletCharacter(q, order_all, idx, cond, tuple(exps)))
    return out


def _local_conductor(p: int, comps: list, exps: list[int]) -> int:
    if all(j == 0 for j in exps):
        return 1
    m = comps[0][1]
    e = round(math.log(m, p))
    tables = [_local_components(p, e)[i] for i in range(len(comps))]
    for f in range(1, e + 1):
        step = p**f
        us = np.arange(1, m, step, dtype=np.int64)
        ok = True
        for (order, table), j in zip(tables, exps):
            if np.any((j * table[us]) % order != 0):
                ok = False
                break
        if ok:
            return step
    return m


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum over n mod q of chi(n) e(n/q)."""
    q = chi.modulus
    n = np.arange(q)
    return complex(np.sum(chi.values() * np.exp(2j * np.pi * n / q)))
