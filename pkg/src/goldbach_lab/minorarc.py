"""Minor-arc machinery: Vaughan's decomposition, type I and type II bounds,
the Moebius-ratio bound and the explicit bound for |S_eta2| on the minor arcs.

Every bound is returned next to an exactly computed desk-scale quantity it
is supposed to control, as a :class:`BoundReport`.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import arith
from . import expsum
from . import rigor as rg
from . import smoothing as sm
from .config import check_budget
from .errors import DomainError, UnsupportedError
from .report import BoundReport
from .smoothing import Smoothing

# constants of the explicit minor-arc bound
THEOREM_X0 = 2.16e20
R_SCALE = 0.27125
R_SHIFT = 0.41415
R_DENOM_FACTOR = 2.004
MAIN_SHIFT = 0.5
SQRT_TERM = 2.5
POWER_TERM = 3.2
LARGE_Q_MAIN = 0.2727
LARGE_Q_SECOND = 1218.0

RAMARE_CONSTANT = 0.8
S1_CONSTANT = 3.0 / math.pi**2
S1_CONSTANT_ODD = 2.0 / math.pi**2
S1_AVERAGE = 0.22482
S1_AVERAGE_ODD = 0.15107
GEOMETRIC_C = 0.5

# Proportionality constants for the three type I main terms. The defaults
# were checked against the exact double sum at x = 1e5 (see type_I_bound).
TYPE_I_CONSTANTS = {"main": 1.0, "fourier": 1.0, "q_log": 1.0}


# ---------------------------------------------------------------------------
# Vaughan's identity


@dataclass
class VaughanSplit:
    n: int
    U: float
    V: float
    t1a: float  # (mu_{<=U} * log)(n)
    t1b: float  # (Lambda_{<=V} * mu_{<=U} * 1)(n)
    t2: float  # (1 * mu_{>U} * Lambda_{>V})(n)
    tail: float  # Lambda_{<=V}(n)

    @property
    def total(self) -> float:
        return math.fsum((self.t1a, -self.t1b, self.t2, self.tail))

    @property
    def residual(self) -> float:
        return abs(self.total - arith.mangoldt(self.n))


def divisors(n: int) -> list[int]:
    out = [1]
    for p, e in arith.factorize(n).items():
        out = [d * p**k for d in out for k in range(e + 1)]
    return sorted(out)


def vaughan_split(n: int, U: float, V: float) -> VaughanSplit:
    """The four pieces of Lambda(n) in Vaughan's identity, by divisor enumeration."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if U < 1 or V < 1:
        raise DomainError("U and V must be >= 1")
    divs = divisors(n)
    mu = {d: arith.moebius(d) for d in divs}
    lam = {d: arith.mangoldt(d) for d in divs}
    t1a = math.fsum(mu[d] * math.log(n // d) for d in divs if d <= U and mu[d])
    t1b_terms = []
    t2_terms = []
    for d in divs:
        for v in divisors(d):
            u = d // v
            if lam[v] and mu[u]:
                if v <= V and u <= U:
                    t1b_terms.append(lam[v] * mu[u])
                elif v > V and u > U:
                    t2_terms.append(lam[v] * mu[u])
    tail = lam[n] if n <= V else 0.0
    return VaughanSplit(n, float(U), float(V), t1a, math.fsum(t1b_terms), math.fsum(t2_terms), tail)


def vaughan_max_residual(n_max: int, U: float, V: float) -> float:
    return max(vaughan_split(n, U, V).residual for n in range(1, n_max + 1))


def vaughan_parameters(x: float, q: int, delta: float) -> tuple[float, float]:
    """U = V with U V = x / sqrt(q max(4, |delta|))."""
    uv = x / math.sqrt(q * max(4.0, abs(delta)))
    u = max(1.0, math.sqrt(uv))
    return u, u


# ---------------------------------------------------------------------------
# type I: geometric sums and their smoothed versions


def _dist_to_int(a: float) -> float:
    f = a - math.floor(a)
    return min(f, 1.0 - f)


def _exp_sum_exact(alpha: float, ns: np.ndarray, weights=None) -> complex:
    ph = np.exp(2j * np.pi * expsum.frac_product(alpha, ns))
    if weights is not None:
        ph = ph * weights
    return complex(math.fsum(ph.real), math.fsum(ph.imag))


def geometric_tail(alpha: float, N: int) -> BoundReport:
    """min(N, 1/(2 ||alpha||)) against |sum_{n<=N} e(alpha n)| computed term by term."""
    if N < 1:
        raise DomainError("N must be >= 1")
    check_budget(32 * N, "geometric sum")
    exact = abs(_exp_sum_exact(alpha, np.arange(1, N + 1, dtype=np.int64)))
    d = _dist_to_int(alpha)
    branch = GEOMETRIC_C / d if d > 0 else math.inf
    bound = float(min(N, branch))
    return BoundReport("geometric_tail", exact, bound, terms={"N": N, "c_over_dist": branch},
                       params={"alpha": alpha, "N": N, "c": GEOMETRIC_C}, rel_tol=1e-12)


def smoothed_branches(eta: Smoothing, alpha: float, x: float) -> dict:
    l1, tv, f2 = eta.norm_l1, eta.norm_l1_deriv, eta.sup_norm_fourier_second_deriv
    if f2 is None:
        raise UnsupportedError(f"|eta''^|_inf is undefined for {eta.name}")
    s = abs(math.sin(math.pi * alpha))
    s2 = s * s  # underflows to 0 for tiny alpha, where the branch is infinite anyway
    return {
        "trivial": x * l1 + tv / 2,
        "variation": tv / (2 * s) if s > 0 else math.inf,
        "fourier": f2 / (4 * x * s2) if s2 > 0 else math.inf,
    }


def smoothed_inner_bound(eta: Smoothing, alpha: float, x: float) -> BoundReport:
    """Three-way minimum bound on |sum_n e(alpha n) eta(n/x)| against the exact sum."""
    terms = smoothed_branches(eta, alpha, x)
    lo, hi = eta.support
    if not math.isfinite(hi):
        raise UnsupportedError("exact comparison needs a compactly supported weight")
    ns = np.arange(max(1, math.ceil(lo * x)), math.floor(hi * x) + 1, dtype=np.int64)
    check_budget(40 * ns.size, "smoothed geometric sum")
    exact = abs(_exp_sum_exact(alpha, ns, eta(ns / x)))
    active = min(terms, key=terms.get)
    return BoundReport("smoothed_inner", exact, terms[active], terms=terms,
                       params={"alpha": alpha, "x": x, "eta": eta.name}, rel_tol=1e-9,
                       extra={"active": active})


def block_min_sum(A: float, B: float, C: float, alpha: float, q: int, y: int) -> float:
    """sum over y < m <= y + q, q not dividing m, of min(A, B/|sin pi alpha m|, C/sin^2)."""
    m = np.arange(y + 1, y + q + 1, dtype=np.int64)
    m = m[m % q != 0]
    s = np.abs(np.sin(np.pi * expsum.frac_product(alpha, m)))
    with np.errstate(divide="ignore"):
        vals = np.minimum(A, np.minimum(B / s, C / s**2))
    return math.fsum(vals)


def all_terms_sum(A: float, C: float, alpha: float, q: int, y: int) -> float:
    m = np.arange(y + 1, y + q + 1, dtype=np.int64)
    s = np.abs(np.sin(np.pi * expsum.frac_product(alpha, m)))
    with np.errstate(divide="ignore"):
        vals = np.minimum(A, C / s**2)
    return math.fsum(vals)


def min_triplet_bound(A: float, B: float, C: float, q: int, mode: str = "exclude_multiples") -> float:
    """Upper bound for a block of q consecutive terms of min(A, B/|sin|, C/sin^2).

    Both modes need alpha within 1/(qQ) of a/q for some Q >= q.
    ``exclude_multiples`` drops m divisible by q and also needs y + q <= Q/2;
    ``all_terms`` keeps every m and holds for any y.
    """
    if min(A, C) <= 0 or q < 1 or (mode == "exclude_multiples" and B <= 0):
        raise DomainError("A, B, C must be positive and q >= 1")
    root = (4 * q / math.pi) * math.sqrt(A * C)
    if mode == "all_terms":
        return 3 * A + root
    if mode != "exclude_multiples":
        raise DomainError(f"unknown mode {mode!r}")
    first = 20 / (3 * math.pi**2) * C * q * q
    second = 2 * A + root
    third = (2 * B * q / math.pi) * max(2.0, math.log(C * math.e**3 * q / (B * math.pi)))
    return min(first, second, third)


# ---------------------------------------------------------------------------
# Moebius sums


@lru_cache(maxsize=4)
def _mu_over_n(n: int) -> np.ndarray:
    mu = arith.moebius_array(n).astype(float)
    out = np.zeros(n + 1)
    out[1:] = mu[1:] / np.arange(1, n + 1)
    out.flags.writeable = False
    return out


def coprime_moebius_sum(x: float, q: int) -> float:
    """sum_{a <= x, gcd(a, q) = 1} mu(a)/a."""
    n = int(math.floor(x))
    if n < 1:
        return 0.0
    check_budget(24 * n, "moebius table")
    terms = np.array(_mu_over_n(n))
    for p in arith.factorize(q):
        terms[::p] = 0.0
    return math.fsum(terms)


def moebius_ratio(x: float, q: int) -> BoundReport:
    """|sum_{a<=x,(a,q)=1} mu(a)/a| against (4/5)(q/phi(q))/log(x/q)."""
    if q < 1:
        raise DomainError("q must be >= 1")
    if q > x:
        raise DomainError("moebius_ratio needs q <= x")
    value = coprime_moebius_sum(x, q)
    ratio_log = math.log(x / q)
    flags = []
    if ratio_log <= 0:
        bound = math.inf
        flags.append("bound check skipped: log(x/q) = 0")
    else:
        bound = RAMARE_CONSTANT * (q / arith.totient(q)) / ratio_log
    return BoundReport("moebius_ratio", abs(value), bound, terms={"sum": value},
                       params={"x": x, "q": q}, flags=flags, rel_tol=1e-12, extra={"sum": value})


def mertens_reciprocal_check(x_max: int) -> BoundReport:
    """sup over real 0 < x <= x_max of |sum_{n<=x} mu(n)/n| / sqrt(2/x).

    The sum is constant on [n, n+1), where sqrt(2/x) is smallest as x
    approaches n + 1, so each integer n is checked against sqrt(2/(n+1))
    (and the last one against sqrt(2/x_max)).
    """
    n = int(x_max)
    partial = np.cumsum(_mu_over_n(n)[1:])
    right = np.arange(2, n + 2, dtype=float)
    right[-1] = float(x_max)
    ratio = np.abs(partial) / np.sqrt(2.0 / right)
    worst = int(np.argmax(ratio))
    return BoundReport("mertens_reciprocal", float(ratio[worst]), 1.0, params={"x_max": x_max}, rel_tol=1e-12,
                       extra={"worst_n": worst + 1, "violations": int(np.sum(ratio > 1.0 + 1e-12))})


# ---------------------------------------------------------------------------
# type I double sum


def _rational_phase(a: int, q: int, delta: float, x: float, k: np.ndarray) -> np.ndarray:
    """e((a/q + delta/x) k) with the rational part reduced exactly."""
    return np.exp(2j * np.pi * (((a * k) % q) / q + expsum.frac_product(delta / x, k)))


def type_I_sum(D: float, a: int, q: int, delta: float, x: float, eta: Smoothing) -> complex:
    """sum_{m<=D} mu(m) sum_n e(alpha m n) eta(m n / x), alpha = a/q + delta/x."""
    lo, hi = eta.support
    mus = arith.moebius_array(int(D))
    ks, ws = [], []
    for m in range(1, int(D) + 1):
        if not mus[m]:
            continue
        n = np.arange(max(1, math.ceil(lo * x / m)), math.floor(hi * x / m) + 1, dtype=np.int64)
        ks.append(m * n)
        ws.append(mus[m] * eta(m * n / x))
    if not ks:
        return 0j
    k = np.concatenate(ks)
    check_budget(48 * k.size, "type I double sum")
    z = _rational_phase(a, q, delta, x, k) * np.concatenate(ws)
    return complex(math.fsum(z.real), math.fsum(z.imag))


def type_I_terms(D: float, q: int, delta: float, x: float, eta: Smoothing, constants: dict | None = None) -> dict:
    c = dict(TYPE_I_CONSTANTS, **(constants or {}))
    f2 = eta.sup_norm_fourier_second_deriv
    if f2 is None:
        raise UnsupportedError(f"|eta''^|_inf is undefined for {eta.name}")
    main = x / (arith.totient(q) * math.log(x / q)) * min(1.0, 1.0 / delta**2 if delta else 1.0)
    return {
        "main": c["main"] * main,
        "fourier": c["fourier"] * (2 / math.pi) * math.sqrt(f2) * D,
        "q_log": c["q_log"] * q * math.log(max(D / q, q)),
    }


def type_I_bound(D: float, q: int, delta: float, x: float, eta: Smoothing | None = None, a: int = 1,
                 constants: dict | None = None) -> BoundReport:
    """Sum of the three type I main terms against the exact double sum."""
    eta = sm.eta2() if eta is None else eta
    if q < 1 or not D < x:
        raise DomainError("type_I_bound needs q >= 1 and D < x")
    if math.gcd(a, q) != 1:
        raise DomainError("a must be coprime to q")
    terms = type_I_terms(D, q, delta, x, eta, constants)
    measured = abs(type_I_sum(D, a, q, delta, x, eta))
    return BoundReport("type_I", measured, math.fsum(terms.values()), terms=terms,
                       params={"D": D, "a": a, "q": q, "delta": delta, "x": x, "eta": eta.name},
                       flags=["constants reconstructed"])


# ---------------------------------------------------------------------------
# type II


def s1_exact(U: float, W: float, x: float, odd_only: bool = False) -> float:
    """sum over x/2W < m <= x/W of |sum_{d > U, d | m} mu(d)|^2."""
    lo = int(math.floor(x / (2 * W))) + 1
    hi = int(math.floor(x / W))
    if hi < lo:
        return 0.0
    check_budget(16 * (hi - lo + 1), "S1 table")
    # sum_{d | m} mu(d) = [m = 1], so the d > U part is [m = 1] minus the d <= U part
    inner = np.zeros(hi - lo + 1, dtype=np.int64)
    if lo == 1:
        inner[0] = 1
    mus = arith.moebius_array(min(int(U), hi))
    for d in np.nonzero(mus)[0]:
        d = int(d)
        if d == 0:
            continue
        first = -(-lo // d) * d
        inner[first - lo :: d] -= mus[d]
    if odd_only:
        m = np.arange(lo, hi + 1)
        inner = inner[m % 2 == 1]
    return float(np.sum(inner * inner))


def type_II_S1(U: float, W: float, x: float, odd_only: bool = False) -> BoundReport:
    """Exact S1(U, W) against (3/pi^2)(x/W), or (2/pi^2)(x/W) on odd m."""
    if x / (2 * W) < 1:
        raise DomainError("type_II_S1 needs x/(2W) >= 1")
    value = s1_exact(U, W, x, odd_only)
    const = S1_CONSTANT_ODD if odd_only else S1_CONSTANT
    scale = x / W
    return BoundReport("type_II_S1", value, const * scale, terms={"constant": const, "x_over_W": scale},
                       params={"U": U, "W": W, "x": x, "odd_only": odd_only},
                       extra={"normalized": value / scale,
                              "average_constant": S1_AVERAGE_ODD if odd_only else S1_AVERAGE})


def s1_average(U: float, x: float, Ws, odd_only: bool = False) -> dict:
    """Mean of S1(U, W)/(x/W) over a grid of W, next to the quoted average constant."""
    vals = [s1_exact(U, W, x, odd_only) / (x / W) for W in Ws]
    return {"mean": float(np.mean(vals)), "max": float(np.max(vals)),
            "reference": S1_AVERAGE_ODD if odd_only else S1_AVERAGE, "count": len(vals)}


def s2_exact(V: float, W: float, alpha: float, x: float) -> float:
    """sum over x/2W <= m <= x/W of |sum_{max(V, W/2) <= n <= W} Lambda(n) e(alpha m n)|^2."""
    m = np.arange(int(math.ceil(x / (2 * W))), int(math.floor(x / W)) + 1, dtype=np.int64)
    n = np.arange(int(math.ceil(max(V, W / 2))), int(math.floor(W)) + 1, dtype=np.int64)
    lam = arith.mangoldt_array(int(W))[n] if n.size else np.zeros(0)
    keep = lam > 0
    n, lam = n[keep], lam[keep]
    if m.size == 0 or n.size == 0:
        return 0.0
    rows = max(1, (1 << 22) // n.size)
    total = []
    for i in range(0, m.size, rows):
        k = np.outer(m[i : i + rows], n)
        ph = np.exp(2j * np.pi * expsum.frac_product(alpha, k.ravel())).reshape(k.shape)
        total.extend(np.abs(ph @ lam) ** 2)
    return math.fsum(total)


def s2_bound(W: float, q: int, delta: float, x: float) -> tuple[float, str, dict]:
    phi = arith.totient(q)
    if abs(delta) > 4:
        spread = abs(delta) * q
        body = (x / (abs(delta) * phi) + (q / phi) * W / 2) * W / 2
        branch = "scattered"
    else:
        spread = 2 * q
        body = (x / (4 * phi) + q * W / phi) * W / 2
        branch = "plain"
    if W > spread:
        factor = math.log(W) / math.log(W / spread)
    else:
        factor = math.log(W)
        branch += "_no_gain"
    return factor * body, branch, {"log_factor": factor, "body": body}


def type_II_S2(V: float, W: float, alpha: float, q: int, delta: float, x: float) -> BoundReport:
    """Exact S2(V, W) against the large-sieve bound (scattered form when |delta| > 4)."""
    value = s2_exact(V, W, alpha, x)
    bound, branch, terms = s2_bound(W, q, delta, x)
    flags = ["log gain dropped"] if branch.endswith("no_gain") else []
    return BoundReport("type_II_S2", value, bound, terms=terms, flags=flags,
                       params={"V": V, "W": W, "alpha": alpha, "q": q, "delta": delta, "x": x},
                       extra={"branch": branch})


# ---------------------------------------------------------------------------
# the explicit minor-arc bound


@dataclass
class TheoremBound:
    x: float
    q: int
    delta: float
    delta0: float
    term_main: float
    term_sqrt: float
    term_L: float
    term_power: float
    total: float
    branch: str
    flags: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.flags

    def to_dict(self) -> dict:
        return asdict(self)


def small_q_branch(x: float, q: int) -> bool:
    """q <= x^(1/3)/6, decided exactly as (6q)^3 <= x."""
    return Fraction(6 * q) ** 3 <= Fraction(x)


def r_factor(x: float, t: float) -> float:
    inner = 9 * x ** (1 / 3) / (R_DENOM_FACTOR * t)
    if inner <= 1:
        return math.nan
    return R_SCALE * math.log(1 + math.log(4 * t) / (2 * math.log(inner))) + R_SHIFT


def l_factor(delta0: float, q: int) -> float:
    phi_ratio = arith.totient(q) / q
    first = (1.75 * math.log(delta0) + 3.25 * math.log(q) + 80 / 9) / phi_ratio
    return first + (80 / 9) * math.log(q) + (16 / 9) * math.log(delta0) + 111 / 5


def theorem_bound(x: float, q: int, delta: float) -> TheoremBound:
    """Bound on |S_eta2(alpha, x)| for 2 alpha = a/q + delta/x."""
    if q < 1 or x < 2:
        raise DomainError("theorem_bound needs q >= 1 and x >= 2")
    flags = []
    if x < THEOREM_X0:
        flags.append("x below 2.16e20")
    Q = 0.75 * x ** (2 / 3)
    if q > Q:
        flags.append("q > (3/4) x^(2/3)")
    if abs(delta) / x > 1 / (q * Q):
        flags.append("|delta/x| > 1/(qQ)")
    delta0 = max(2.0, abs(delta) / 4)
    logx = math.log(x)
    if small_q_branch(x, q):
        t = delta0 * q
        R = r_factor(x, t)
        if math.isnan(R):
            flags.append("R undefined")
        main = (R * math.log(t) + MAIN_SHIFT) / math.sqrt(delta0 * arith.totient(q)) * x
        sqrt_term = SQRT_TERM * x / math.sqrt(t)
        l_term = 2 * x / t * l_factor(delta0, q)
        power = POWER_TERM * x ** (5 / 6)
        return TheoremBound(x, q, float(delta), delta0, main, sqrt_term, l_term, power,
                            math.fsum((main, sqrt_term, l_term, power)), "small_q", flags)
    first = LARGE_Q_MAIN * x ** (5 / 6) * logx**1.5
    second = LARGE_Q_SECOND * x ** (2 / 3) * logx
    return TheoremBound(x, q, float(delta), delta0, first, 0.0, second, 0.0, first + second, "large_q", flags)


def _decimal(v: float) -> rg.Expr:
    return rg.Const(rg.Interval.around(v))


def _ratio(num: int, den: int) -> rg.Expr:
    return rg.Const(rg.Interval.point(num) / rg.Interval.point(den))


def _root_power(base: rg.Expr, num: int, den: int) -> rg.Expr:
    return rg.exp(_ratio(num, den) * rg.log(base))


def theorem_bound_expression(x: float, q: int, delta: float) -> rg.Expr:
    """The bound of :func:`theorem_bound` as an expression tree in the variable ``x``.

    Decimal constants enter as the tightest double intervals around them and
    rational ones as exact quotients, so interval evaluation encloses the
    value of the formula over the reals.
    """
    X = rg.Var("x")
    logx = rg.log(X)
    if not small_q_branch(x, q):
        first = _decimal(LARGE_Q_MAIN) * _root_power(X, 5, 6) * rg.exp(_ratio(3, 2) * rg.log(logx))
        return first + rg.wrap(LARGE_Q_SECOND) * _root_power(X, 2, 3) * logx
    d0 = rg.wrap(max(2.0, abs(delta) / 4))
    qq = rg.wrap(float(q))
    phi = rg.wrap(float(arith.totient(q)))
    t = d0 * qq
    inner = 9 * _root_power(X, 1, 3) / (_decimal(R_DENOM_FACTOR) * t)
    R = _decimal(R_SCALE) * rg.log(1 + rg.log(4 * t) / (2 * rg.log(inner))) + _decimal(R_SHIFT)
    main = (R * rg.log(t) + MAIN_SHIFT) / rg.sqrt(d0 * phi) * X
    sqrt_term = SQRT_TERM * X / rg.sqrt(t)
    first = (_ratio(7, 4) * rg.log(d0) + _ratio(13, 4) * rg.log(qq) + _ratio(80, 9)) / (phi / qq)
    L = first + _ratio(80, 9) * rg.log(qq) + _ratio(16, 9) * rg.log(d0) + _ratio(111, 5)
    l_term = 2 * X / t * L
    power = _decimal(POWER_TERM) * _root_power(X, 5, 6)
    return main + sqrt_term + l_term + power


def theorem_bound_enclosure(x: float, q: int, delta: float) -> rg.Interval | None:
    """Certified enclosure of the bound, or None where the formula is undefined."""
    try:
        return rg.interval_eval(theorem_bound_expression(x, q, delta), {"x": rg.Interval.point(x)})
    except DomainError:
        return None


# ---------------------------------------------------------------------------
# desk-scale survey


SURVEY_R = 10
SURVEY_C0 = 8.0
SURVEY_X_MAX = 1e7


@dataclass
class SurveyReport:
    x: float
    rows: list
    excluded: list
    summary: dict

    def write_csv(self, path) -> None:
        cols = ["alpha", "a", "q", "delta", "measured", "bound", "ratio", "branch", "validity", "kind"]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in self.rows:
                w.writerow({c: r[c] for c in cols})

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary, fh, indent=1, sort_keys=True)


def survey_samples(x: float, count: int, seed: int = 0, r: int = SURVEY_R) -> list[tuple[float, str]]:
    """Half uniform alphas, half placed next to rationals with medium denominators."""
    rng = np.random.default_rng(seed)
    n_uniform = count - count // 2
    out = [(float(a), "uniform") for a in rng.random(n_uniform)]
    q_hi = max(r + 2, int(x ** (1 / 3) / 6))
    for _ in range(count // 2):
        q = int(rng.integers(r + 1, q_hi + 1))
        a = int(rng.integers(1, q))
        while math.gcd(a, q) != 1:
            a = int(rng.integers(1, q))
        d = float(rng.uniform(-16, 16))
        out.append((((a / q + d / x) / 2) % 1.0, "near_rational"))
    return out


def classify(alpha: float, x: float, r: int = SURVEY_R, c0: float = SURVEY_C0) -> tuple[arith.RationalApprox, bool]:
    """Approximate 2 alpha with Q = (3/4) x^(2/3); major arc iff q <= r and |delta| <= c0 r / q."""
    Q = max(1, int(0.75 * x ** (2 / 3)))
    approx = arith.best_approx((2 * alpha) % 1.0, Q, x)
    major = approx.q <= r and abs(approx.delta) <= c0 * r / approx.q
    return approx, major


def _survey_chunk(args):
    x, alphas = args
    return expsum.s_eta_batch(sm.eta2(), alphas, x)


def minor_arc_survey(x: float, sample_count: int, seed: int = 0, r: int = SURVEY_R, c0: float = SURVEY_C0,
                     workers: int = 1, samples=None) -> SurveyReport:
    """Measured |S_eta2(alpha, x)| against the explicit bound, row by row."""
    if x > SURVEY_X_MAX:
        raise DomainError("survey limited to x <= 1e7")
    samples = survey_samples(x, sample_count, seed, r) if samples is None else samples
    rows, excluded, live = [], [], []
    for alpha, kind in samples:
        approx, major = classify(alpha, x, r, c0)
        if major:
            excluded.append({"alpha": alpha, "a": approx.a, "q": approx.q, "delta": approx.delta})
        else:
            live.append((alpha, kind, approx))
    alphas = [a for a, _, _ in live]
    chunks = [alphas[i : i + 64] for i in range(0, len(alphas), 64)]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_survey_chunk, [(x, c) for c in chunks]))
    else:
        parts = [_survey_chunk((x, c)) for c in chunks]
    values = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    for (alpha, kind, approx), val in zip(live, values):
        tb = theorem_bound(x, approx.q, approx.delta)
        measured = float(abs(val))
        rows.append({"alpha": alpha, "a": approx.a, "q": approx.q, "delta": approx.delta, "measured": measured,
                     "bound": tb.total, "ratio": measured / tb.total, "branch": tb.branch,
                     "validity": "valid" if tb.valid else "; ".join(tb.flags), "kind": kind})
    ratios = np.array([r_["ratio"] for r_ in rows])
    summary = {"x": x, "samples": len(samples), "rows": len(rows), "excluded_major": len(excluded),
               "seed": seed, "r": r, "c0": c0, "ratio_above_one": int(np.sum(ratios > 1)) if rows else 0,
               "quantiles": ({str(p): float(np.quantile(ratios, p)) for p in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)}
                             if rows else {}),
               "normalization": "2 alpha = a/q + delta/x"}
    return SurveyReport(x, rows, excluded, summary)
