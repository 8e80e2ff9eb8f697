"""Exponential sums over prime powers and exact representation counting.

Single sums are accumulated with ``math.fsum`` (exactly rounded), so the
result does not depend on summation order or on how the range is split.
Phases e(alpha n) are reduced modulo 1 with an exact integer step, so the
argument passed to cos/sin is accurate even for n near 10^9.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import arith
from .config import check_budget
from .errors import DomainError, PrecisionError, ResourceError
from .report import BoundReport
from .smoothing import CUTOFF, Smoothing

DFT_REP_LIMIT = 10_000_000
BRUTE_REP_LIMIT = 10_000
ARC_DENSITY = 8  # grid points per narrowest arc


class EvenTargetWarning(UserWarning):
    """Counting three-prime representations of an even number."""


@dataclass
class ExpSum:
    """A prime exponential sum and where it came from."""

    value: complex
    x: float
    alpha: float
    eta: str
    terms: int
    cutoff: float = CUTOFF
    trivial: float = 0.0  # sum of Lambda(n)|eta(n/x)|, the triangle-inequality ceiling

    def __abs__(self) -> float:
        return abs(self.value)


# ---------------------------------------------------------------------------
# prime-power tables restricted to the support of a weight


def _round_up_key(n: int) -> int:
    """Round n up to m * 2^j with 8 <= m < 16, so cached tables get reused."""
    if n < 16:
        return 16
    j = n.bit_length() - 4
    m = -(-n >> j)
    return m << j


def support_terms(eta: Smoothing, x: float, cutoff: float = CUTOFF):
    """Prime powers n with |eta(n/x)| > cutoff, their Lambda(n) and eta(n/x)."""
    if x < 2:
        raise DomainError("exponential sums need x >= 2")
    lo, hi = eta.support
    n_hi = int(math.floor(hi * x))
    n_lo = max(2, int(math.ceil(lo * x)))
    if n_hi < n_lo:
        z = np.zeros(0)
        return np.zeros(0, dtype=np.int64), z, z
    check_budget(24 * n_hi // max(int(math.log(n_hi + 2)), 1) + n_hi // 2, "prime-power table")
    ns, lam = arith.prime_powers_upto(_round_up_key(n_hi))
    i0, i1 = np.searchsorted(ns, [n_lo, n_hi + 1])
    ns, lam = ns[i0:i1], lam[i0:i1]
    w = eta(ns / x)
    keep = np.abs(w) > cutoff
    return ns[keep], lam[keep], w[keep]


def frac_product(alpha: float, n: np.ndarray) -> np.ndarray:
    """alpha * n modulo 1, with the integer part removed exactly.

    alpha is split into a 26-bit dyadic head (whose product with n is done
    in exact integer arithmetic) and a small tail.
    """
    a = alpha - math.floor(alpha)
    head = round(a * 2**26)
    tail = a - head / 2**26
    n = np.asarray(n, dtype=np.int64)
    if n.size and int(n.max()) >= 2**37:
        raise ResourceError("phase reduction supports n < 2^37")
    frac = ((head * n) & (2**26 - 1)).astype(np.float64) / 2**26
    frac += tail * n.astype(np.float64)
    return frac - np.floor(frac)


def _phases(alpha: float, n: np.ndarray) -> np.ndarray:
    return np.exp(2j * np.pi * frac_product(alpha, n))


def _fsum_complex(z: np.ndarray) -> complex:
    return complex(math.fsum(z.real), math.fsum(z.imag))


def s_eta(eta: Smoothing, alpha: float, x: float, cutoff: float = CUTOFF) -> ExpSum:
    """Sum of Lambda(n) e(alpha n) eta(n/x) over n >= 1."""
    ns, lam, w = support_terms(eta, x, cutoff)
    coef = lam * w
    val = _fsum_complex(coef * _phases(alpha, ns))
    return ExpSum(val, float(x), float(alpha), eta.name, int(ns.size), cutoff, math.fsum(np.abs(coef)))


def s_eta_rational(eta: Smoothing, a: int, q: int, beta: float, x: float, cutoff: float = CUTOFF) -> ExpSum:
    """s_eta at alpha = a/q + beta, with e(an/q) computed exactly from residues."""
    ns, lam, w = support_terms(eta, x, cutoff)
    coef = lam * w
    ph = np.exp(2j * np.pi * ((a * ns) % q) / q) * _phases(beta, ns)
    val = _fsum_complex(coef * ph)
    return ExpSum(val, float(x), a / q + beta, eta.name, int(ns.size), cutoff, math.fsum(np.abs(coef)))


def s_eta_batch(eta: Smoothing, alphas, x: float, cutoff: float = CUTOFF, chunk: int = 16) -> np.ndarray:
    """Many values of s_eta at once (plain dot products, no compensated summation)."""
    ns, lam, w = support_terms(eta, x, cutoff)
    coef = lam * w
    alphas = np.asarray(alphas, dtype=float)
    out = np.empty(alphas.size, dtype=complex)
    for i in range(0, alphas.size, chunk):
        block = alphas[i : i + chunk]
        ph = np.exp(2j * np.pi * np.array([frac_product(a, ns) for a in block]))
        out[i : i + chunk] = ph @ coef
    return out


def s_eta_chi(eta: Smoothing, chi: arith.DirichletCharacter, delta: float, x: float,
              cutoff: float = CUTOFF) -> ExpSum:
    """Sum of Lambda(n) chi(n) e(delta n / x) eta(n/x)."""
    ns, lam, w = support_terms(eta, x, cutoff)
    idx = chi.index_of(ns)
    live = idx >= 0
    ns, lam, w, idx = ns[live], lam[live], w[live], idx[live]
    chiv = arith.root_of_unity(idx, chi.order)
    coef = lam * w
    val = _fsum_complex(coef * chiv * _phases(delta / x, ns))
    return ExpSum(val, float(x), float(delta / x), f"{eta.name}*chi", int(ns.size), cutoff,
                  math.fsum(np.abs(coef)))


def linear_combination_check(eta: Smoothing, a: int, q: int, delta: float, x: float) -> BoundReport:
    """Expand e(an/q) in characters and compare both sides of the resulting identity.

    The left side is s_eta at a/q + delta/x.  The right side is the sum over
    characters chi mod q of c_chi times the twisted sum with the primitive
    character inducing chi, where c_chi = chi(a) tau(conj chi) / phi(q).  The
    two differ only on prime powers of primes dividing q; the reported bound
    is that contribution counted with absolute values.
    """
    if math.gcd(a, q) != 1:
        raise DomainError("need gcd(a, q) = 1")
    phi = arith.totient(q)
    lhs = s_eta_rational(eta, a % q, q, delta / x, x).value
    rhs = 0j
    worst = 0.0
    csum = 0.0
    cache: dict = {}
    for chi in arith.characters_mod(q):
        c = complex(chi(a)) * arith.gauss_sum(chi.conj()) / phi
        d = chi.conductor
        ratio = abs(c) * phi / math.sqrt(d)
        worst = max(worst, ratio)
        assert abs(c) <= math.sqrt(d) / phi * (1 + 1e-9), "character coefficient too large"
        prim = chi.induced_primitive()
        key = (d, tuple(prim.index.tolist()), prim.order)
        if key not in cache:
            cache[key] = s_eta_chi(eta, prim, delta, x).value
        rhs += c * cache[key]
        csum += abs(c)
    ns, lam, w = support_terms(eta, x)
    shared = np.array([math.gcd(int(n), q) > 1 for n in ns], dtype=bool) if q > 1 else np.zeros(ns.size, bool)
    budget = (1.0 + csum) * math.fsum(np.abs(lam[shared] * w[shared]))
    disc = abs(lhs - rhs)
    scale = math.fsum(np.abs(lam * w))
    return BoundReport(
        "character_expansion", disc, budget + 1e-12 * scale,
        terms={"lhs": lhs, "rhs": rhs, "gcd_terms": budget},
        params={"a": a, "q": q, "delta": delta, "x": x},
        extra={"max_coefficient_ratio": worst, "relative_discrepancy": disc / scale if scale else 0.0},
    )


# ---------------------------------------------------------------------------
# representation counts


@dataclass
class RepCount:
    n: int
    weighted: float
    unweighted: int
    method: str = "dft"
    flags: list = field(default_factory=list)


def _round_exact(v: np.ndarray, what: str) -> np.ndarray:
    r = np.rint(v)
    err = float(np.max(np.abs(v - r))) if v.size else 0.0
    if err > 0.25:
        raise PrecisionError(f"{what}: floating DFT too inaccurate to round", err)
    return r.astype(np.int64)


def _fft_convolve(a: np.ndarray, b: np.ndarray, length: int) -> np.ndarray:
    size = 1 << max(1, (a.size + b.size - 1).bit_length())
    fa = np.fft.rfft(a, size)
    fb = fa if b is a else np.fft.rfft(b, size)
    return np.fft.irfft(fa * fb, size)[:length]


def pair_counts(m: int, method: str = "dft") -> np.ndarray:
    """Ordered pairs of primes summing to each value 0..m."""
    ind = np.zeros(m + 1)
    ind[arith.primes_upto(m)] = 1.0
    if method == "dft":
        return _round_exact(_fft_convolve(ind, ind, m + 1), "pair counts")
    ps = arith.primes_upto(m)
    sums = np.add.outer(ps, ps).ravel()
    return np.bincount(sums[sums <= m], minlength=m + 1).astype(np.int64)


def _weights(m: int, eta: Smoothing, x: float) -> np.ndarray:
    f = np.zeros(m + 1)
    ns, lam, w = support_terms(eta, x)
    keep = ns <= m
    f[ns[keep]] = lam[keep] * w[keep]
    return f


def count_reps(n: int, mode: str = "unweighted", etas=None, x: float | None = None,
               method: str = "dft") -> RepCount:
    """Ordered representations of n as p1 + p2 + p3.

    ``unweighted`` counts prime triples exactly.  ``weighted`` evaluates
    (f1 * f2 * f3)(n) with f_i(m) = Lambda(m) eta_i(m/x) over prime powers;
    by default every eta_i is the sharp cutoff at x = n.  ``method`` is
    ``dft`` (FFT convolution, rounded and checked) or ``brute`` (explicit
    enumeration of all prime pairs).
    """
    n = int(n)
    if n < 7:
        raise DomainError("count_reps needs n >= 7")
    limit = DFT_REP_LIMIT if method == "dft" else BRUTE_REP_LIMIT
    if method not in ("dft", "brute"):
        raise DomainError(f"unknown method {method!r}")
    if n > limit:
        raise ResourceError(f"n = {n} exceeds the {method} limit {limit}")
    flags = []
    if n % 2 == 0:
        warnings.warn(f"n = {n} is even", EvenTargetWarning, stacklevel=2)
        flags.append("even")
    check_budget(96 * (n + 1), "count_reps")
    r2 = pair_counts(n, method)
    ps = arith.primes_upto(n)
    unweighted = int(np.sum(r2[n - ps[ps <= n - 4]]))

    from .smoothing import sharp

    if etas is None:
        etas = (sharp(), sharp(), sharp())
        x = float(n)
    elif x is None:
        raise DomainError("weighted counts with explicit weights need a scale x")
    f1, f2, f3 = (_weights(n, e, x) for e in etas)
    if method == "dft":
        conv = _fft_convolve(f1, f2, n + 1)
        weighted = float(np.dot(conv[::-1], f3))
    else:
        ns1 = np.flatnonzero(f1)
        ns2 = np.flatnonzero(f2)
        sums = np.add.outer(ns1, ns2).ravel()
        vals = np.multiply.outer(f1[ns1], f2[ns2]).ravel()
        keep = sums <= n
        conv = np.bincount(sums[keep], weights=vals[keep], minlength=n + 1)
        weighted = math.fsum(conv[::-1] * f3)
    return RepCount(n, weighted, unweighted, method, flags)


def rep_table(n_max: int) -> np.ndarray:
    """Exact ordered prime-triple counts for every 0 <= n <= n_max by two DFT passes."""
    if n_max > BRUTE_REP_LIMIT * 100:
        raise ResourceError("rep_table is meant for small ranges")
    r2 = pair_counts(n_max)
    ind = np.zeros(n_max + 1)
    ind[arith.primes_upto(n_max)] = 1.0
    return _round_exact(_fft_convolve(r2.astype(float), ind, n_max + 1), "triple counts")


def rep_table_brute(n_max: int) -> np.ndarray:
    """Same table by explicit pair enumeration followed by a sum over the third prime."""
    r2 = pair_counts(n_max, "brute")
    out = np.zeros(n_max + 1, dtype=np.int64)
    for p in arith.primes_upto(n_max):
        p = int(p)
        out[p:] += r2[: n_max + 1 - p]
    return out


# ---------------------------------------------------------------------------
# circle integrals on the DFT grid


def grid_values(coef: np.ndarray, N: int) -> np.ndarray:
    """S(k/N) = sum_m coef[m] e(km/N) for 0 <= k <= N/2 (coef real, folded mod N)."""
    if coef.size > N:
        pad = (-coef.size) % N
        folded = np.concatenate((coef, np.zeros(pad))).reshape(-1, N).sum(axis=0)
    else:
        folded = coef
    return np.conj(np.fft.rfft(folded, N))


def _half_to_index(half: np.ndarray, N: int, k: np.ndarray) -> np.ndarray:
    k = np.mod(k, N)
    upper = k > N // 2
    out = half[np.where(upper, N - k, k)]
    return np.where(upper, np.conj(out), out)


def plancherel(eta: Smoothing, x: float) -> BoundReport:
    """Mean square of S over the circle (DFT grid) against the sum of squared coefficients."""
    ns, lam, w = support_terms(eta, x)
    coef_sq = math.fsum((lam * w) ** 2)
    if ns.size == 0:
        return BoundReport("plancherel", 0.0, 0.0)
    span = int(ns[-1] - ns[0]) + 1
    N = 1 << span.bit_length()
    check_budget(40 * N, "plancherel grid")
    coef = np.zeros(int(ns[-1]) + 1)
    coef[ns] = lam * w
    half = grid_values(coef, N)
    mag = np.abs(half) ** 2
    total = (mag[0] + mag[N // 2] + 2.0 * math.fsum(mag[1 : N // 2])) / N
    rel = abs(total - coef_sq) / coef_sq
    return BoundReport("plancherel", rel, 1e-10, terms={"circle_integral": total, "coef_square_sum": coef_sq},
                       params={"x": x, "N": N, "eta": eta.name})


def _normalize_arcs(arcs) -> list[tuple[float, float]]:
    if arcs is None:
        return []
    if hasattr(arcs, "intervals"):
        return [(float(a), float(b)) for a, b in arcs.intervals()]
    if arcs == "full":
        return [(0.0, 1.0)]
    return [(float(a), float(b)) for a, b in arcs]


def _interp_integral(values_at, N: int, lo: float, hi: float) -> complex:
    """Integral over [lo, hi] of the piecewise-linear interpolant of grid values at k/N."""
    if hi <= lo:
        return 0j
    a, b = lo * N, hi * N
    k0, k1 = math.ceil(a), math.floor(b)
    if k0 > k1:
        kl = math.floor(a)
        v = values_at(np.array([kl, kl + 1]))
        fa = v[0] + (v[1] - v[0]) * (a - kl)
        fb = v[0] + (v[1] - v[0]) * (b - kl)
        return complex((b - a) * (fa + fb) / 2 / N)
    ks = np.arange(k0, k1 + 1)
    v = values_at(ks)
    inner = 0.5 * (v[0] + v[-1]) + np.sum(v[1:-1]) if ks.size > 1 else 0.0
    total = inner
    if a < k0:
        vv = values_at(np.array([k0 - 1, k0]))
        fa = vv[1] + (vv[0] - vv[1]) * (k0 - a)
        total = total + (k0 - a) * (fa + vv[1]) / 2
    if b > k1:
        vv = values_at(np.array([k1, k1 + 1]))
        fb = vv[0] + (vv[1] - vv[0]) * (b - k1)
        total = total + (b - k1) * (vv[0] + fb) / 2
    return complex(total / N)


@dataclass
class ArcIntegral:
    value: complex
    coarse: complex
    fine: complex
    error: float
    N: int
    exact_full_circle: bool


def _arc_pass(coefs, n: int, intervals, N: int) -> complex:
    halves = [grid_values(c, N) for c in coefs]
    prod = halves[0] * halves[0] * halves[1]
    k = np.arange(N // 2 + 1)
    prod *= np.exp(-2j * np.pi * ((k * (n % N)) % N) / N)
    del halves

    def values_at(ks):
        return _half_to_index(prod, N, np.asarray(ks, dtype=np.int64))

    total = 0j
    for lo, hi in intervals:
        total += _interp_integral(values_at, N, lo, hi)
    return total


def arc_integral_detailed(eta_plus: Smoothing, eta_star: Smoothing, n: int, arcs, x: float | None = None,
                          density: int = ARC_DENSITY, N: int | None = None) -> ArcIntegral:
    """Integral over arcs of S_plus(alpha)^2 S_star(alpha) e(-alpha n), trapezoid plus Richardson."""
    intervals = _normalize_arcs(arcs)
    x = n / 2 if x is None else float(x)
    if not intervals:
        return ArcIntegral(0j, 0j, 0j, 0.0, 0, True)
    nsp, lsp, wsp = support_terms(eta_plus, x)
    nss, lss, wss = support_terms(eta_star, x)
    m_plus, m_star = int(nsp[-1]), int(nss[-1])
    span = 2 * m_plus + m_star + 1
    narrowest = min(hi - lo for lo, hi in intervals)
    need = int(math.ceil(density / narrowest)) if narrowest > 0 else 1
    exact = True
    if N is None:
        N = 1 << max(span, need).bit_length()
        if 2 * 56 * N > _budget():
            # grid values stay exact under folding; only the full-circle
            # trapezoid loses exactness, so take the largest grid that fits
            N = max(1 << (_budget() // 112).bit_length() - 1, 1 << need.bit_length())
            exact = False
    check_budget(2 * 56 * N, "arc integral grid")
    cp = np.zeros(m_plus + 1)
    cp[nsp] = lsp * wsp
    cs = np.zeros(m_star + 1)
    cs[nss] = lss * wss
    coarse = _arc_pass((cp, cs), n, intervals, N)
    fine = _arc_pass((cp, cs), n, intervals, 2 * N)
    value = fine + (fine - coarse) / 3.0
    return ArcIntegral(value, coarse, fine, abs(fine - coarse) / 3.0, N, exact and N > span)


def _budget() -> int:
    from .config import budget_bytes

    return budget_bytes()


def arc_integral(eta_plus: Smoothing, eta_star: Smoothing, n: int, arcs, x: float | None = None,
                 density: int = ARC_DENSITY, rtol: float | None = None) -> complex:
    """Integral over the given arcs of S_plus^2 S_star e(-alpha n).

    With ``rtol`` set, a Richardson error estimate above ``rtol * |value|``
    raises PrecisionError (carrying the estimate).
    """
    res = arc_integral_detailed(eta_plus, eta_star, n, arcs, x, density)
    if rtol is not None and res.error > rtol * max(abs(res.value), 1e-300):
        raise PrecisionError("arc grid too coarse", res.error / max(abs(res.value), 1e-300), res.value)
    return res.value
