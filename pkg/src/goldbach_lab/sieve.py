"""Large-sieve inequalities and the gain from prime support.

Point sets keep exact rational coordinates so that separation claims are
checked without rounding.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import arith
from . import expsum
from . import smoothing as sm
from .config import check_budget
from .errors import DomainError, ResourceError
from .majorarc import farey
from .report import BoundReport
from .smoothing import Smoothing

EULER_GAMMA = 0.5772156649015329
REFINED_SHIFT = 1.36  # added to log s
REFINED_DENOM_SHIFT = 1.36  # the "small constant" added to log x
LARGE_SIEVE_RTOL = 1e-9
GAIN_S_LIMIT = 2000


def circle_distance(a: Fraction, b: Fraction) -> Fraction:
    d = (a - b) % 1
    return min(d, 1 - d)


@dataclass
class PointSet:
    """Points of R/Z with a certified minimum pairwise circle distance."""

    points: list[Fraction]
    min_separation: Fraction

    def __post_init__(self):
        self.points = [Fraction(p) % 1 for p in self.points]
        self.min_separation = Fraction(self.min_separation)
        if self.min_separation <= 0:
            raise DomainError("separation must be positive")
        actual = exact_min_separation(self.points)
        if actual < self.min_separation:
            raise DomainError(f"points are only {float(actual):.3g} apart, claimed {float(self.min_separation):.3g}")

    def __len__(self) -> int:
        return len(self.points)

    def as_float(self) -> np.ndarray:
        return np.array([float(p) for p in self.points])


def exact_min_separation(points) -> Fraction:
    """Smallest circle distance between distinct indices (1 for a single point)."""
    pts = sorted(Fraction(p) % 1 for p in points)
    if len(pts) < 2:
        return Fraction(1)
    gaps = [b - a for a, b in zip(pts, pts[1:])]
    gaps.append(1 + pts[0] - pts[-1])
    return min(gaps)


def equispaced(q: int, shift: Fraction = Fraction(0)) -> PointSet:
    return PointSet([shift + Fraction(j, q) for j in range(q)], Fraction(1, q))


# ---------------------------------------------------------------------------
# baseline large sieve


def large_sieve_check(points: PointSet, coeffs, start: int = 0) -> BoundReport:
    """sum_i |f^(alpha_i)|^2 against (X + 1/beta) sum |f(n)|^2.

    ``coeffs[k]`` is f(start + k); the support length X is taken as
    len(coeffs) - 1, the length of the interval spanned.
    """
    f = np.asarray(coeffs, dtype=complex)
    if f.size == 0:
        return BoundReport("large_sieve", 0.0, 0.0)
    n = np.arange(start, start + f.size, dtype=np.int64)
    check_budget(16 * f.size * max(1, len(points)), "large sieve evaluation")
    lhs = []
    for p in points.points:
        # exact reduction of p n mod 1 through the numerator
        ph = ((p.numerator * n) % p.denominator) / p.denominator
        z = np.exp(2j * np.pi * ph) @ f
        lhs.append(abs(z) ** 2)
    X = f.size - 1
    mass = math.fsum(np.abs(f) ** 2)
    rhs = (X + 1 / float(points.min_separation)) * mass
    return BoundReport("large_sieve", math.fsum(lhs), rhs, terms={"X": X, "inv_beta": 1 / float(points.min_separation),
                                                                  "l2_mass": mass},
                       params={"points": len(points), "length": int(f.size)}, rel_tol=LARGE_SIEVE_RTOL)


# ---------------------------------------------------------------------------
# delta-scattered blocks


@dataclass
class ScatteredPartition:
    alpha: Fraction
    block_size: int
    separation: Fraction
    blocks: list[PointSet]
    flags: list = field(default_factory=list)

    @property
    def block_count(self) -> int:
        return len(self.blocks)


def scattered_block_size(q: int, delta: float, x: float) -> int:
    """Largest m such that any m consecutive multiples of alpha are q|delta|/x apart.

    Two multiples k apart with q not dividing k sit at least 1/q - k|delta|/x
    apart; requiring that to stay >= q|delta|/x gives k <= x/(q|delta|) - q.
    Multiples of q drift by l q |delta|/x, which is already enough.
    """
    ratio = Fraction(x) / (q * abs(Fraction(delta)))
    return math.floor(ratio) - q + 1


def scattered_points(a: int, q: int, delta: float, x: float, L: int) -> ScatteredPartition:
    """Split {alpha, 2 alpha, ..., L alpha}, alpha = a/q + delta/x, into well-separated blocks."""
    if math.gcd(a, q) != 1 or q < 1:
        raise DomainError("need gcd(a, q) = 1 and q >= 1")
    if delta == 0:
        raise DomainError("delta must be nonzero")
    if L < 1:
        raise DomainError("L must be >= 1")
    alpha = Fraction(a, q) + Fraction(delta) / Fraction(x)
    sep = q * abs(Fraction(delta)) / Fraction(x)
    m = scattered_block_size(q, delta, x)
    flags = []
    if m < 1:
        flags.append("degenerate: q|delta|/x too large, singleton blocks")
        m = 1
    check_budget(200 * L, "scattered point list")
    blocks = []
    for start in range(1, L + 1, m):
        pts = [k * alpha for k in range(start, min(L, start + m - 1) + 1)]
        claim = sep if len(pts) > 1 else Fraction(1)
        blocks.append(PointSet(pts, min(claim, Fraction(1))))
    return ScatteredPartition(alpha, m, sep, blocks, flags)


# ---------------------------------------------------------------------------
# prime support


def prime_sieve_factor(s: float, x: float) -> float:
    """2 e^gamma log s / log(x/s^2)."""
    return 2 * math.exp(EULER_GAMMA) * math.log(s) / math.log(x / s**2)


def refined_factor(s: float, x: float, c: float = REFINED_DENOM_SHIFT) -> float:
    """2 (log s + 1.36) / (log x + c)."""
    return 2 * (math.log(s) + REFINED_SHIFT) / (math.log(x) + c)


def default_prime_coeffs(x: float, eta: Smoothing | None = None) -> tuple[np.ndarray, np.ndarray]:
    """a_p = log p * eta(p/x) on primes sqrt(x) < p <= x."""
    eta = sm.eta2() if eta is None else eta
    ps = arith.primes_upto(int(x)).astype(np.int64)
    ps = ps[ps > math.isqrt(int(x))]
    vals = np.log(ps) * eta(ps / x)
    keep = vals != 0
    return ps[keep], vals[keep]


def farey_l2_sum(s: int, ns: np.ndarray, vals: np.ndarray) -> float:
    """sum_{q<=s} sum_{(a,q)=1} |sum a_n e(a n/q)|^2 via per-q DFTs of residues."""
    total = []
    for q in range(1, s + 1):
        b = np.bincount(ns % q, weights=vals.real, minlength=q) + 1j * np.bincount(ns % q, weights=vals.imag,
                                                                                 minlength=q)
        sums = np.fft.ifft(b) * q  # sum_r b_r e(a r / q)
        a = np.arange(q)
        coprime = np.gcd(a, q) == 1
        total.append(math.fsum(np.abs(sums[coprime]) ** 2))
    return math.fsum(total)


def prime_support_gain(s: int, x: float, coeffs=None) -> BoundReport:
    """Q(s) / ((x + s^2) sum |a_n|^2) against the prime-support factor 2 e^gamma log s / log(x/s^2).

    ``coeffs`` is a pair (n, a_n) with every n a prime in (sqrt x, x];
    the default is a_p = log p * eta2(p/x).
    """
    if s < 1:
        raise DomainError("s must be >= 1")
    if s > GAIN_S_LIMIT:
        raise ResourceError(f"exact Q(s) limited to s <= {GAIN_S_LIMIT}")
    ns, vals = default_prime_coeffs(x) if coeffs is None else coeffs
    ns = np.asarray(ns, dtype=np.int64)
    vals = np.asarray(vals, dtype=complex)
    if ns.size and (ns.min() <= math.isqrt(int(x)) or ns.max() > x
                    or not all(arith.is_prime(int(n)) for n in ns)):
        raise DomainError("coefficients must sit on primes in (sqrt x, x]")
    flags = []
    if s > x**0.3:
        flags.append("s above x^0.3")
    Qs = farey_l2_sum(s, ns, vals)
    mass = math.fsum(np.abs(vals) ** 2)
    ratio = Qs / ((x + s * s) * mass) if mass else 0.0
    base = prime_sieve_factor(s, x) if s > 1 else 0.0
    ref = refined_factor(s, x)
    extra = {"Q": Qs, "l2_mass": mass, "refined_factor": ref, "refined_exceeded": ratio > ref}
    if ratio > ref:
        flags.append("observation: refined factor exceeded")
    bound = base if s > 1 else math.inf
    return BoundReport("prime_support_gain", ratio, bound, terms={"prime_sieve": base, "refined": ref},
                       params={"s": s, "x": x, "terms": int(ns.size)}, flags=flags, extra=extra)


def write_gain_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "x", "measured", "prime_sieve_factor", "refined_factor"])
        for r in reports:
            w.writerow([r.params["s"], repr(r.params["x"]), repr(r.measured), repr(r.terms["prime_sieve"]),
                        repr(r.terms["refined"])])


# ---------------------------------------------------------------------------
# l2 mass of S on arc unions


def arc_union(s: int, x: float, c0: float = 8.0) -> list[tuple[float, float]]:
    """Union of arcs around a/q, q <= s, halfwidth c0 s/(q x), merged, inside [-1/2, 3/2)."""
    raw = sorted((float(c) - c0 * s / (c.denominator * x), float(c) + c0 * s / (c.denominator * x))
                 for c in farey(s))
    merged = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    if len(merged) > 1 and merged[-1][1] - 1 >= merged[0][0]:
        # wraps onto the arc at 0
        lo, hi = merged.pop()
        merged[0][0] = min(merged[0][0], lo - 1)
        merged[0][1] = max(merged[0][1], hi - 1)
    out = [(lo, hi) for lo, hi in merged]
    span = out[-1][1] - out[0][0]
    if span >= 1 or (len(out) == 1 and out[0][1] - out[0][0] >= 1):
        return [(0.0, 1.0)]
    return out


def _l2_on_grid(half: np.ndarray, N: int, intervals) -> float:
    sq = np.abs(half) ** 2

    def values_at(ks):
        k = np.mod(np.asarray(ks, dtype=np.int64), N)
        return sq[np.where(k > N // 2, N - k, k)]

    return math.fsum(expsum._interp_integral(values_at, N, lo, hi).real for lo, hi in intervals)


def arcs_l2_mass(eta: Smoothing, x: float, s: int, c0: float = 8.0, c: float = REFINED_DENOM_SHIFT) -> BoundReport:
    """Share of the l2 mass of S_eta(., x) carried by the arcs around a/q, q <= s."""
    if x > 1e6:
        raise ResourceError("arcs_l2_mass limited to x <= 1e6")
    if s < 1 or s > 100:
        raise DomainError("s must be in [1, 100]")
    ns, lam, w = expsum.support_terms(eta, x)
    coef = np.zeros(int(ns[-1]) + 1)
    coef[ns] = lam * w
    full = math.fsum(coef**2)
    intervals = arc_union(s, x, c0)
    span = coef.size
    narrowest = min(hi - lo for lo, hi in intervals)
    N = 1 << max(4 * span, int(64 / narrowest)).bit_length()
    check_budget(48 * 2 * N, "arc l2 grid")
    if intervals == [(0.0, 1.0)]:
        part = full
        err = 0.0
    else:
        coarse = _l2_on_grid(expsum.grid_values(coef, N), N, intervals)
        fine = _l2_on_grid(expsum.grid_values(coef, 2 * N), 2 * N, intervals)
        part = fine + (fine - coarse) / 3
        err = abs(fine - coarse) / 3
    ratio = part / full
    ref = refined_factor(s, x, c) if s > 1 else math.inf
    flags = [] if ratio <= ref else ["observation: refined factor exceeded"]
    return BoundReport("arcs_l2_mass", ratio, ref,
                       terms={"prime_sieve": prime_sieve_factor(s, x) if s > 1 else 0.0, "refined": ref},
                       params={"x": x, "s": s, "c0": c0, "eta": eta.name}, flags=flags,
                       extra={"arc_integral": part, "full_integral": full, "quadrature_error": err,
                              "measure": math.fsum(hi - lo for lo, hi in intervals), "grid": N})
