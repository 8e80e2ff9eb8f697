"""Major-arc geometry and main-term predictions.

Arc endpoints are exact rationals, so disjointness is decided without
rounding. The main-term predictor pairs the Gaussian-weighted prime sum with
its explicit error envelope; the three-prime prediction multiplies the
singular series by a double integral of the weights.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import arith
from . import expsum
from . import smoothing as sm
from .config import check_budget
from .errors import DomainError
from .quadrature import panel_nodes, split_edges
from .report import BoundReport
from .smoothing import Smoothing

DEFAULT_C0 = 8.0
ENVELOPE_R = 300_000
ENVELOPE_MIN_X = 1e8

# |E| <= FLOOR + (SCALE / sqrt(q) + SHIFT) / sqrt(x), Gaussian weight
ENVELOPE_FLOOR = 5.281e-22
ENVELOPE_SCALE = 650400.0
ENVELOPE_SHIFT = 112.0

ENVELOPE_KINDS = ("gaussian", "t2_gaussian", "eta_plus")

# Heights up to which L(s, chi) zeros were checked on the critical line, by
# conductor. Kept as reference data; no computation here consumes it.
ZERO_HEIGHT_RULES = {
    "odd": {"numerator": 10**8, "max_conductor": ENVELOPE_R // 2},
    "even": {"numerator": 10**8, "floor": 200, "floor_numerator": 75_000_000, "max_conductor": ENVELOPE_R},
}

# Relative tolerance of the three-prime prediction against the measured arc
# integral at desk scale, frozen from calibration runs at n ~ 1e5, 1e6, 1e7.
MAJOR_INTEGRAL_RTOL = 0.05

_ARC_BYTES = 240  # rough footprint of one exact arc


def zero_height(q: int) -> float:
    """Height to which zeros of L(s, chi) with conductor q were verified."""
    if q < 1:
        raise DomainError("conductor must be >= 1")
    if q % 2:
        return 1e8 / q
    return max(1e8 / q, 200.0 + 7.5e7 / q)


def zero_height_table(q_max: int) -> list[tuple[int, float]]:
    return [(q, zero_height(q)) for q in range(1, q_max + 1)]


# ---------------------------------------------------------------------------
# arcs


@dataclass
class ArcSet:
    """Arcs around a/q (q <= r) with halfwidth c0 r / (q x), endpoints exact."""

    centers: list[Fraction]
    halfwidths: list[Fraction]
    r: int
    c0: float
    x: float

    def __len__(self) -> int:
        return len(self.centers)

    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        """Arcs as [c - h, c + h]; the arc at 0 straddles 0 (periodic use)."""
        return [(c - h, c + h) for c, h in zip(self.centers, self.halfwidths)]

    @property
    def measure_exact(self) -> Fraction:
        return 2 * sum(self.halfwidths, Fraction(0))

    @property
    def measure(self) -> float:
        return float(self.measure_exact)

    def denominators(self) -> list[int]:
        return [c.denominator for c in self.centers]

    def contains(self, alpha: float) -> bool:
        a = Fraction(alpha) % 1
        for c, h in zip(self.centers, self.halfwidths):
            d = abs(a - c)
            if min(d, 1 - d) <= h:
                return True
        return False

    def complement(self) -> list[tuple[Fraction, Fraction]]:
        """The minor arcs, as open gaps inside [0, 1)."""
        if not self.centers:
            return [(Fraction(0), Fraction(1))]
        ends = []
        for c, h in zip(self.centers, self.halfwidths):
            ends.append((c - h, c + h))
        ends.sort()
        out = []
        first_lo, first_hi = ends[0]
        prev_hi = first_hi
        for lo, hi in ends[1:]:
            out.append((prev_hi, lo))
            prev_hi = hi
        out.append((prev_hi, 1 + first_lo))
        return out

    def is_disjoint(self) -> bool:
        return _first_overlap(self.centers, self.halfwidths) is None

    def to_json(self) -> str:
        rows = [{"a": c.numerator, "q": c.denominator, "halfwidth": [h.numerator, h.denominator],
                 "halfwidth_float": float(h)} for c, h in zip(self.centers, self.halfwidths)]
        return json.dumps({"r": self.r, "c0": self.c0, "x": self.x, "measure": self.measure, "arcs": rows},
                          indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ArcSet":
        d = json.loads(text)
        centers = [Fraction(a["a"], a["q"]) for a in d["arcs"]]
        halves = [Fraction(*a["halfwidth"]) for a in d["arcs"]]
        return cls(centers, halves, d["r"], d["c0"], d["x"])


def farey(r: int) -> list[Fraction]:
    """Reduced fractions a/q in [0, 1) with q <= r, in increasing order."""
    out = []
    a, b, c, d = 0, 1, 1, r
    while a < b:
        out.append(Fraction(a, b))
        k = (r + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return out


def _first_overlap(centers, halves):
    """First pair of circular neighbours whose closed arcs meet, or None."""
    n = len(centers)
    if n == 0:
        return None
    order = sorted(range(n), key=lambda i: centers[i])
    if n == 1:
        return None if 2 * halves[0] < 1 else (order[0], order[0])
    for i, j in zip(order, order[1:] + order[:1]):
        gap = (centers[j] - centers[i]) % 1
        if gap <= halves[i] + halves[j]:
            return i, j
    return None


def build_major_arcs(r: int, c0: float = DEFAULT_C0, x: float = 1e6) -> ArcSet:
    """All arcs around a/q with q <= r, gcd(a, q) = 1, halfwidth c0 r / (q x)."""
    if r < 1:
        raise DomainError("r must be >= 1")
    if not c0 > 0 or not x > 0:
        raise DomainError("c0 and x must be positive")
    count = int(sum(arith.totient_array(r)[1:]))
    check_budget(count * _ARC_BYTES, "major arc list")
    scale = Fraction(c0) * r / Fraction(x)
    centers = farey(r)
    halves = [scale / c.denominator for c in centers]
    hit = _first_overlap(centers, halves)
    if hit is not None:
        i, j = hit
        raise DomainError(f"arcs around {centers[i]} and {centers[j]} overlap at r={r}, c0={c0:g}, x={x:g}")
    return ArcSet(centers, halves, r, float(c0), float(x))


def arc_measure_formula(r: int, c0: float, x: float) -> float:
    """(2 c0 r / x) * sum_{q <= r} phi(q) / q."""
    phi = arith.totient_array(r)
    q = np.arange(1, r + 1)
    return 2.0 * c0 * r / x * math.fsum(phi[1:] / q)


# ---------------------------------------------------------------------------
# main term with explicit envelope


@dataclass
class MajorArcEstimate:
    main: float
    error_budget: float
    q: int
    delta: float
    x: float
    eta: str
    flags: list = field(default_factory=list)
    main_half_line: complex = 0j

    @property
    def lower(self) -> float:
        return self.main - self.error_budget

    @property
    def upper(self) -> float:
        return self.main + self.error_budget


def envelope(q: int, x: float) -> float:
    """Relative error |E| of the Gaussian major-arc estimate."""
    return ENVELOPE_FLOOR + (ENVELOPE_SCALE / math.sqrt(q) + ENVELOPE_SHIFT) / math.sqrt(x)


def major_estimate(eta: Smoothing, q: int, delta: float, x: float) -> MajorArcEstimate:
    """Predicted S_{eta,chi}(delta/x, x) for primitive chi mod q, with its error budget.

    ``main`` uses the whole-line transform of the Gaussian (its closed form);
    ``main_half_line`` is the transform over t >= 0, which is what a sum over
    positive n sees.
    """
    if q < 1:
        raise DomainError("q must be >= 1")
    if not x > 0:
        raise DomainError("x must be positive")
    flags = []
    if eta.kind not in ENVELOPE_KINDS:
        raise DomainError(f"no envelope for weight {eta.name}; expected one of {ENVELOPE_KINDS}")
    if eta.kind != "gaussian":
        flags.append("shape-only")
    if x < ENVELOPE_MIN_X:
        flags.append("outside stated validity: x < 1e8")
    if q > ENVELOPE_R:
        flags.append("outside stated validity: q > 300000")
    if abs(delta) > 4 * ENVELOPE_R / q:
        flags.append("outside stated validity: |delta| > 4r/q")
    if q == 1:
        main = sm.fourier(eta, -delta).real * x
        half = sm.fourier_half_line(eta, -delta) * x
    else:
        main, half = 0.0, 0j
    budget = envelope(q, x) * x
    return MajorArcEstimate(main, budget, q, float(delta), float(x), eta.name, flags, half)


def write_estimates_csv(estimates, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eta", "q", "delta", "x", "main", "error_budget", "flags"])
        for e in estimates:
            w.writerow([e.eta, e.q, repr(e.delta), repr(e.x), repr(e.main), repr(e.error_budget), ";".join(e.flags)])


# ---------------------------------------------------------------------------
# singular series


@dataclass
class SingularSeries:
    value: float
    tail_radius: float  # true value lies in [value, value + tail_radius]
    cutoff: int
    n: int

    def __float__(self) -> float:
        return self.value


def singular_series(n: int, prime_cutoff: int = 10_000) -> SingularSeries:
    """prod_{p | n} (1 - 1/(p-1)^2) * prod_{p not | n} (1 + 1/(p-1)^3), truncated at p <= cutoff.

    Prime divisors of n above the cutoff are included exactly. Every omitted
    factor is 1 + 1/(p-1)^3 >= 1 with log at most 1/(p-1)^3, and
    sum_{k >= P} 1/k^3 <= 1/(2 (P-1)^2); the log of the omitted product is
    bounded by twice that, 1/(P-1)^2.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if prime_cutoff < 100:
        raise DomainError("prime_cutoff must be >= 100")
    if n % 2 == 0:
        return SingularSeries(0.0, 0.0, prime_cutoff, n)
    ps = arith.primes_upto(prime_cutoff).astype(float)
    divides = np.array([n % int(p) == 0 for p in ps])
    pm1 = ps - 1.0
    logs = np.where(divides, np.log1p(-1.0 / pm1**2, where=pm1 > 1, out=np.zeros_like(pm1)),
                    np.log1p(1.0 / pm1**3))
    # p = 2 never divides odd n: factor 2
    total = math.fsum(logs)
    for p in arith.factorize(n):
        if p > prime_cutoff:
            total += math.log1p(-1.0 / (p - 1) ** 2)
    value = math.exp(total)
    log_radius = 1.0 / (prime_cutoff - 1) ** 2
    return SingularSeries(value, value * math.expm1(log_radius), prime_cutoff, n)


# ---------------------------------------------------------------------------
# smoothing double integral


@dataclass
class CEtaIntegral:
    value: float
    error: float
    approx: float  # concentration approximation |eta_*|_1 * (f * g)(ratio)
    gap: float  # |value - approx| / |value|
    ratio: float


def _self_convolution(f: Smoothing, g: Smoothing, s: np.ndarray, nodes: int) -> np.ndarray:
    """(f * g)(s) = integral f(t) g(s - t) dt, additive convolution."""
    out = np.zeros(len(s))
    fe = np.asarray(f.edges, dtype=float)
    ge = np.asarray(g.edges, dtype=float)
    for i, sv in enumerate(s):
        pts = np.concatenate((fe, sv - ge))
        lo, hi = max(fe[0], sv - ge[-1]), min(fe[-1], sv - ge[0])
        if hi <= lo:
            continue
        pts = np.unique(np.clip(pts, lo, hi))
        pts = split_edges(pts, 0.25)
        t, w = panel_nodes(pts, nodes)
        out[i] = np.dot(w, f(t) * g(sv - t))
    return out


def _c_eta_pass(f, g, star, ratio, nodes):
    lo_s, hi_s = star.support
    s_lo, s_hi = ratio - hi_s, ratio - lo_s
    a_lo = f.edges[0] + g.edges[0]
    a_hi = f.edges[-1] + g.edges[-1]
    s_lo, s_hi = max(s_lo, a_lo), min(s_hi, a_hi)
    if s_hi <= s_lo:
        return 0.0
    edges = split_edges([s_lo, s_hi], (hi_s - lo_s) / 8)
    s, w = panel_nodes(edges, nodes)
    return float(np.dot(w, _self_convolution(f, g, s, nodes) * star(ratio - s)))


def c_eta_integral_detailed(eta_circ: Smoothing, eta_star: Smoothing, ratio: float,
                            eta_second: Smoothing | None = None, rtol: float = 1e-6) -> CEtaIntegral:
    """Double integral of eta_circ(t1) eta_second(t2) eta_star(ratio - t1 - t2)."""
    if ratio < 0:
        raise DomainError("ratio must be >= 0")
    g = eta_circ if eta_second is None else eta_second
    coarse = _c_eta_pass(eta_circ, g, eta_star, ratio, 12)
    fine = _c_eta_pass(eta_circ, g, eta_star, ratio, 24)
    err = abs(fine - coarse)
    if err > rtol * max(abs(fine), 1e-300) and fine != 0.0:
        fine = _c_eta_pass(eta_circ, g, eta_star, ratio, 48)
        err = abs(fine - coarse)
    conv = _self_convolution(eta_circ, g, np.array([float(ratio)]), 48)[0]
    approx = float(eta_star.norm_l1 * conv)
    gap = float(abs(fine - approx) / abs(fine)) if fine else abs(approx)
    return CEtaIntegral(fine, err, approx, gap, float(ratio))


def c_eta_integral(eta_circ: Smoothing, eta_star: Smoothing, ratio: float,
                   eta_second: Smoothing | None = None) -> float:
    return c_eta_integral_detailed(eta_circ, eta_star, ratio, eta_second).value


# ---------------------------------------------------------------------------
# prediction against the measured arc integral


def major_integral_estimate(n: int, x: float, arcs: ArcSet, eta_plus: Smoothing | None = None,
                            eta_star: Smoothing | None = None, rtol: float = MAJOR_INTEGRAL_RTOL,
                            prime_cutoff: int = 10_000) -> BoundReport:
    """C0 * C_{eta, eta_*} * x^2 against the arc integral of S_plus^2 S_star e(-alpha n).

    ``measured`` is the relative deviation of the prediction from the arc
    integral and ``bound`` is the tolerance; ``extra`` carries both values and
    their ratio.
    """
    eta_plus = sm.build_eta_plus() if eta_plus is None else eta_plus
    eta_star = sm.make_eta_star() if eta_star is None else eta_star
    params = {"n": n, "x": x, "r": getattr(arcs, "r", None), "c0": getattr(arcs, "c0", None)}
    flags = []
    ratio = n / x
    if not 1.5 <= ratio <= 2.5:
        flags.append("x far from n/2")
    if arcs is None or len(arcs) == 0:
        return BoundReport("major_integral", 0.0, rtol, params=params, flags=flags + ["no arcs: comparison skipped"],
                           extra={"predicted": None, "arc_integral": 0.0})
    c0 = singular_series(n, prime_cutoff)
    ceta = c_eta_integral_detailed(eta_plus, eta_star, ratio)
    predicted = c0.value * ceta.value * x * x
    res = expsum.arc_integral_detailed(eta_plus, eta_star, n, arcs, x)
    measured = res.value.real
    terms = {"singular_series": c0.value, "c_eta": ceta.value, "x_squared": x * x}
    extra = {"predicted": predicted, "arc_integral": measured, "arc_integral_imag": res.value.imag,
             "arc_error": res.error, "grid": res.N, "singular_tail": c0.tail_radius, "c_eta_gap": ceta.gap}
    if predicted == 0.0:
        flags.append("even n: prediction 0")
        dev = abs(measured) / (ceta.value * x * x)
        extra["ratio"] = math.nan
    else:
        dev = abs(measured - predicted) / abs(predicted)
        extra["ratio"] = measured / predicted
    return BoundReport("major_integral", dev, rtol, terms=terms, params=params, flags=flags, extra=extra)
