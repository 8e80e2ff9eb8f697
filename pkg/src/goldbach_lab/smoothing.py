"""Smoothing weights, their transforms, and the band-limited constructions.

A :class:`Smoothing` wraps a vectorized evaluator together with its
support and norms.  Norms with a closed form are declared at construction;
the rest are integrated numerically on first use and cached.

Conventions: e(x) = exp(2 pi i x); weights vanish for t < 0; the L1 norm of
the derivative is the total variation of the weight on the whole real line,
so jumps at the ends of the support count.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline
from scipy.special import dawsn

from .errors import DomainError, PrecisionError, UnsupportedError
from .quadrature import panel_nodes, split_edges
from .report import BoundReport

CUTOFF = 1e-15
LOG2 = math.log(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_HALF_PI = math.sqrt(0.5 * math.pi)
# Gaussian-tailed weights are treated as zero beyond this point: exp(-t^2/2) < 1e-15
GAUSS_EDGE = math.sqrt(2.0 * math.log(1e15))
FOURIER_SUP_RANGE = 64.0

KINDS = (
    "gaussian",
    "t2_gaussian",
    "eta1",
    "eta2",
    "eta_circ",
    "h",
    "h_R",
    "eta_plus",
    "eta_star",
    "custom",
)

_UNDEFINED = None


@dataclass(frozen=True, eq=False)
class Smoothing:
    """An evaluable weight with declared support and norms.

    ``func`` is only called on points inside ``support``; everything
    outside evaluates to exactly 0.  ``breaks`` lists interior points where
    the weight or its derivative is not smooth, used to split quadratures.
    ``closed`` holds declared norm values (``None`` marks a norm that is
    undefined for this weight).
    """

    kind: str
    name: str
    func: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float]
    breaks: tuple[float, ...] = ()
    params: dict = field(default_factory=dict)
    closed: dict = field(default_factory=dict)
    deriv: Callable[[np.ndarray], np.ndarray] | None = None
    nonnegative: bool = True

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        lo, hi = self.support
        inside = (arr >= lo) & (arr <= hi)
        out = np.zeros(arr.shape)
        if np.any(inside):
            out[inside] = self.func(arr[inside])
        return float(out) if out.ndim == 0 else out

    @property
    def edges(self) -> np.ndarray:
        lo, hi = self.support
        pts = {lo, hi, *[b for b in self.breaks if lo < b < hi]}
        return np.array(sorted(pts))

    def _integral(self, f: Callable[[float], float]) -> float:
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for a, b in zip(self.edges[:-1], self.edges[1:]):
                val, _ = integrate.quad(f, a, b, limit=400, epsabs=1e-15, epsrel=1e-13)
                total += val
        return total

    @cached_property
    def norm_l1(self) -> float:
        if "l1" in self.closed:
            return self.closed["l1"]
        return self._integral(lambda t: abs(self(t)))

    @cached_property
    def norm_l2(self) -> float:
        if "l2" in self.closed:
            return self.closed["l2"]
        return math.sqrt(self._integral(lambda t: self(t) ** 2))

    @cached_property
    def norm_l1_deriv(self) -> float:
        """Total variation on the real line (jumps at the support ends included)."""
        if "l1_deriv" in self.closed:
            return self.closed["l1_deriv"]
        return total_variation(self)

    @cached_property
    def sup_norm_fourier_second_deriv(self) -> float | None:
        """sup over u of |(2 pi u)^2 times the Fourier transform|, or None if unbounded."""
        if "fourier2_sup" in self.closed:
            return self.closed["fourier2_sup"]
        lo, hi = self.support
        if abs(self(lo)) > 1e-12 or abs(self(hi)) > 1e-12:
            return _UNDEFINED
        return fourier_second_derivative_sup(self)

    def norms(self) -> dict:
        return {
            "norm_l1": self.norm_l1,
            "norm_l2": self.norm_l2,
            "norm_l1_deriv": self.norm_l1_deriv,
            "sup_norm_fourier_second_deriv": self.sup_norm_fourier_second_deriv,
        }


# ---------------------------------------------------------------------------
# generic numerics on weights


def total_variation(eta: Smoothing, samples: int = 20001) -> float:
    """Total variation of ``eta`` extended by zero to the whole line."""
    lo, hi = eta.support
    tv = abs(eta(lo)) + abs(eta(hi))
    edges = eta.edges
    for a, b in zip(edges[:-1], edges[1:]):
        if eta.deriv is not None:
            val, _ = integrate.quad(lambda t: abs(eta.deriv(np.array([t]))[0]), a, b, limit=400,
                                    epsabs=1e-14, epsrel=1e-12)
            tv += val
            continue
        t = np.linspace(a, b, samples)
        v = eta(t)
        d = np.diff(v)
        sign = np.sign(d)
        turns = np.flatnonzero(sign[:-1] * sign[1:] < 0) + 1
        chain = [v[0]]
        for i in turns:
            lo_t, hi_t = t[i - 1], t[i + 1]
            s = -1.0 if d[i - 1] > 0 else 1.0  # maximize at a peak, minimize at a trough
            res = optimize.minimize_scalar(lambda u: s * eta(u), bounds=(lo_t, hi_t), method="bounded",
                                           options={"xatol": 1e-13})
            chain.append(s * res.fun)
        chain.append(v[-1])
        tv += float(np.sum(np.abs(np.diff(chain))))
    return tv


def fourier_numeric(eta: Smoothing, u, nodes_per_panel: int = 16) -> np.ndarray:
    """One-sided transform of ``eta`` at the frequencies ``u`` by composite Gauss-Legendre."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    umax = float(np.max(np.abs(u))) if u.size else 0.0
    width = min(0.05, 1.0 / (umax + 1.0))
    tn, tw = panel_nodes(split_edges(eta.edges, width), nodes_per_panel)
    wv = tw * eta(tn)
    out = np.empty(u.size, dtype=complex)
    step = max(1, int(4e6 // max(tn.size, 1)))
    for i in range(0, u.size, step):
        ph = np.exp(-2j * np.pi * np.outer(u[i : i + step], tn))
        out[i : i + step] = ph @ wv
    return out


def fourier_second_derivative_sup(eta: Smoothing, umax: float = FOURIER_SUP_RANGE) -> float:
    """Numerical sup of |(2 pi u)^2 eta_hat(u)| over 0 <= u <= umax (even in u for real eta)."""
    grid = np.linspace(0.0, umax, int(64 * umax) + 1)
    vals = (2 * np.pi * grid) ** 2 * np.abs(fourier_numeric(eta, grid))
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(
        lambda v: -((2 * np.pi * v) ** 2) * abs(fourier_numeric(eta, [v], 24)[0]),
        bounds=(a, b), method="bounded", options={"xatol": 1e-10},
    )
    return float(max(vals[i], -res.fun))


# ---------------------------------------------------------------------------
# built-in weights


def _eta2_func(t: np.ndarray) -> np.ndarray:
    return np.where(t <= 0.5, 4.0 * np.log(4.0 * t), -4.0 * np.log(t))


def _eta2_deriv(t: np.ndarray) -> np.ndarray:
    return np.where(t <= 0.5, 4.0 / t, -4.0 / t)


def _eta_circ_func(t: np.ndarray) -> np.ndarray:
    # written symmetrically so that t and 2 - t give bit-identical results
    u = t * (2.0 - t)
    d = t - 1.0
    return u * u * u * np.exp(-0.5 * d * d)


def _h_func(t: np.ndarray) -> np.ndarray:
    r = 2.0 - t
    return t * t * r * r * r * np.exp(t - 0.5)


def _h_deriv(t: np.ndarray) -> np.ndarray:
    return np.exp(t - 0.5) * t * (2.0 - t) ** 2 * (4.0 - 3.0 * t - t * t)


def gaussian() -> Smoothing:
    return Smoothing(
        "gaussian", "gaussian", lambda t: np.exp(-0.5 * t * t), (0.0, GAUSS_EDGE),
        closed={"l1": SQRT_HALF_PI, "l2": (math.pi / 4) ** 0.25, "l1_deriv": 2.0, "fourier2_sup": _UNDEFINED},
        deriv=lambda t: -t * np.exp(-0.5 * t * t),
    )


def t2_gaussian() -> Smoothing:
    edge = _decay_edge(lambda y: y * y * math.exp(-0.5 * y * y), 2.0)
    return Smoothing(
        "t2_gaussian", "t2_gaussian", lambda t: t * t * np.exp(-0.5 * t * t), (0.0, edge),
        closed={"l1": SQRT_HALF_PI, "l2": math.sqrt(3 * math.sqrt(math.pi) / 8), "l1_deriv": 4 / math.e},
        deriv=lambda t: (2 * t - t**3) * np.exp(-0.5 * t * t),
    )


def eta1() -> Smoothing:
    return Smoothing(
        "eta1", "eta1", lambda t: np.full(np.shape(t), 2.0), (0.5, 1.0),
        closed={"l1": 1.0, "l2": math.sqrt(2.0), "l1_deriv": 4.0, "fourier2_sup": _UNDEFINED},
        deriv=lambda t: np.zeros(np.shape(t)),
    )


def eta2() -> Smoothing:
    return Smoothing(
        "eta2", "eta2", _eta2_func, (0.25, 1.0), breaks=(0.5,),
        closed={"l1": 1.0, "l2": math.sqrt(24.0 - 32.0 * LOG2), "l1_deriv": 8.0 * LOG2},
        deriv=_eta2_deriv,
    )


def eta_circ() -> Smoothing:
    return Smoothing("eta_circ", "eta_circ", _eta_circ_func, (0.0, 2.0), closed={"l1_deriv": 2.0})


def h_weight() -> Smoothing:
    return Smoothing("h", "h", _h_func, (0.0, 2.0), breaks=(1.0,),
                     closed={"l1_deriv": 2.0 * math.exp(0.5)}, deriv=_h_deriv)


def sharp() -> Smoothing:
    """The indicator of [0, 1]: plain truncation of a sum at x."""
    return Smoothing(
        "custom", "sharp", lambda t: np.ones(np.shape(t)), (0.0, 1.0),
        closed={"l1": 1.0, "l2": 1.0, "l1_deriv": 2.0, "fourier2_sup": _UNDEFINED},
        deriv=lambda t: np.zeros(np.shape(t)),
    )


def custom(func: Callable, support: tuple[float, float], name: str = "custom",
           breaks: tuple[float, ...] = (), nonnegative: bool = True) -> Smoothing:
    lo, hi = support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnsupportedError("custom weights need a finite declared support")
    return Smoothing("custom", name, lambda t: np.asarray(func(t), dtype=float), (float(lo), float(hi)),
                     breaks=tuple(breaks), nonnegative=nonnegative)


def _decay_edge(f: Callable[[float], float], start: float, cutoff: float = CUTOFF) -> float:
    """Smallest t >= start beyond which the decreasing tail f stays below cutoff."""
    return float(optimize.brentq(lambda y: f(y) - cutoff, start, 50.0, xtol=1e-12))


# ---------------------------------------------------------------------------
# band-limited h and the weights built from it

_HR_TMIN = 1e-4
_HR_TMAX = 10.0
_HR_TAYLOR = 1e-4
_HR_POINTS_PER_PERIOD = 10.0


def _dirichlet_kernel(u: np.ndarray, R: float) -> np.ndarray:
    """sin(R u) / (pi u) with its removable singularity handled by a Taylor expansion."""
    small = np.abs(u) < _HR_TAYLOR
    out = np.empty_like(u)
    uu = u[~small]
    out[~small] = np.sin(R * uu) / (np.pi * uu)
    z = R * u[small]
    out[small] = (R / np.pi) * (1.0 - z * z / 6.0 + z**4 / 120.0)
    return out


def band_limited_h(t, R: float, tail: float = 18.0, nodes: int = 8) -> np.ndarray:
    """h_R(t) by direct quadrature of h(t e^{-u}) sin(Ru)/(pi u) over u.

    The integrand vanishes for u < log(t/2) and decays like e^{-2u}, so the
    range is [log(t/2), log(t/2) + tail].  Panels are half a kernel period wide.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if R <= 0:
        raise DomainError("band_limited_h needs R > 0")
    width = np.pi / R
    npan = int(math.ceil(tail / width))
    base, wts = panel_nodes(np.arange(npan + 1) * width, nodes)
    out = np.empty(t.size)
    chunk = max(1, int(2e6 // base.size))
    for i in range(0, t.size, chunk):
        tt = t[i : i + chunk, None]
        u = np.log(tt / 2.0) + base[None, :]
        y = tt * np.exp(-u)
        hv = np.where(y < 2.0, _h_func(np.minimum(y, 2.0)), 0.0)
        out[i : i + chunk] = (hv * _dirichlet_kernel(u, R)) @ wts
    return out


@dataclass(frozen=True, eq=False)
class BandLimitedTable:
    """h_R sampled on a grid uniform in log t, with a cubic spline through it."""

    R: float
    log_t: np.ndarray
    values: np.ndarray
    spline: CubicSpline
    l2_gap: float  # L2 norm of (h_R - h)(t)/t over [t_min, t_max]

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        inner = (t >= _HR_TMIN) & (t <= _HR_TMAX)
        out[inner] = self.spline(np.log(t[inner]))
        low = (t > 0) & (t < _HR_TMIN)
        out[low] = _h_func(t[low])  # below the grid the ripple is far under 1e-15 after weighting
        return out


@lru_cache(maxsize=8)
def band_limited_table(R: float) -> BandLimitedTable:
    R = float(R)
    if R <= 0:
        raise DomainError("band-limited construction needs R > 0")
    step = 2 * np.pi / (_HR_POINTS_PER_PERIOD * R)
    lt = np.arange(math.log(_HR_TMIN), math.log(_HR_TMAX) + step, step)
    vals = band_limited_h(np.exp(lt), R)
    spline = CubicSpline(lt, vals)
    t = np.exp(lt)
    diff = vals - np.where(t < 2.0, _h_func(np.minimum(t, 2.0)), 0.0)
    # integral of |g(t)/t|^2 dt = integral of |g|^2 e^{-v} dv with v = log t
    gap = math.sqrt(float(integrate.trapezoid(diff**2 * np.exp(-lt), lt)))
    return BandLimitedTable(R, lt, vals, spline, gap)


def h_R(R: float = 200.0) -> Smoothing:
    table = band_limited_table(R)
    return Smoothing("h_R", f"h_R(R={R:g})", table, (0.0, _HR_TMAX), params={"R": R,
                     "l2_gap": table.l2_gap}, nonnegative=False)


@lru_cache(maxsize=8)
def build_eta_plus(R: float = 200.0) -> Smoothing:
    """h_R(t) t e^{-t^2/2}: the band-limited stand-in for the symmetric bump weight."""
    table = band_limited_table(R)

    def func(t: np.ndarray) -> np.ndarray:
        return table(t) * t * np.exp(-0.5 * t * t)

    grid = np.linspace(2.0, _HR_TMAX, 8001)
    big = np.flatnonzero(np.abs(func(grid)) > CUTOFF)
    hi = float(grid[min(big[-1] + 1, grid.size - 1)]) if big.size else 2.0
    return Smoothing("eta_plus", f"eta_plus(R={R:g})", func, (0.0, hi), breaks=(2.0,),
                     params={"R": R, "l2_gap": table.l2_gap}, nonnegative=False)


# ---------------------------------------------------------------------------
# Mellin convolution and the concentrated weight


def mellin_convolve(eta_a: Smoothing, eta_b: Smoothing, t: float) -> float:
    """(eta_a *_M eta_b)(t) = integral of eta_a(r) eta_b(t/r) dr/r."""
    t = float(t)
    if t <= 0:
        return 0.0
    a_lo, a_hi = eta_a.support
    b_lo, b_hi = eta_b.support
    lo = max(a_lo, t / b_hi)
    hi = a_hi if b_lo <= 0 else min(a_hi, t / b_lo)
    if hi <= lo:
        return 0.0
    pts = {lo, hi}
    pts.update(p for p in eta_a.edges if lo < p < hi)
    pts.update(t / p for p in eta_b.edges if p > 0 and lo < t / p < hi)
    pts = sorted(pts)

    def f(r):
        return eta_a(r) * eta_b(t / r) / r

    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-15, epsrel=1e-13)
        total += val
    return total


_STAR_NODES = 40


def _t2_gauss(y):
    return y * y * np.exp(-0.5 * y * y)


def eta_star_values(kappa: float, t) -> np.ndarray:
    """(t^2 e^{-t^2/2} *_M eta2)(kappa t) by Gauss-Legendre on the two smooth pieces of eta2."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u, w = panel_nodes([0.25, 0.5, 1.0], _STAR_NODES)
    wt = w * _eta2_func(u) / u
    y = kappa * t[:, None] / u[None, :]
    return np.where(t > 0, _t2_gauss(y) @ wt, 0.0)


def eta_star(kappa: float = 49.0, t=None):
    """The concentrated weight; returns values at ``t`` if given, else the Smoothing."""
    if kappa <= 0:
        raise DomainError("eta_star needs kappa > 0")
    if t is not None:
        v = eta_star_values(kappa, t)
        return float(v[0]) if np.ndim(t) == 0 else v
    return make_eta_star(kappa)


@lru_cache(maxsize=8)
def make_eta_star(kappa: float = 49.0) -> Smoothing:
    # beyond y = kappa t >= sqrt(2) the factor y^2 e^{-y^2/2} is decreasing and
    # the remaining integral of eta2(u)/u is (2 log 2)^2
    weight = (2 * LOG2) ** 2
    y_edge = _decay_edge(lambda y: weight * y * y * math.exp(-0.5 * y * y), 2.0)
    mass = SQRT_HALF_PI / kappa
    return Smoothing("eta_star", f"eta_star(kappa={kappa:g})", lambda t: eta_star_values(kappa, t),
                     (0.0, y_edge / kappa), params={"kappa": kappa}, closed={"l1": mass})


# ---------------------------------------------------------------------------
# registry


def by_name(name: str, R: float = 200.0, kappa: float = 49.0) -> Smoothing:
    """Look up a weight by kind name (plus ``sharp``)."""
    table = {
        "gaussian": gaussian,
        "t2_gaussian": t2_gaussian,
        "eta1": eta1,
        "eta2": eta2,
        "eta_circ": eta_circ,
        "h": h_weight,
        "sharp": sharp,
        "h_R": lambda: h_R(R),
        "eta_plus": lambda: build_eta_plus(R),
        "eta_star": lambda: make_eta_star(kappa),
    }
    if name not in table:
        raise UnsupportedError(f"unknown smoothing {name!r}; choose from {sorted(table)}")
    return table[name]()


def eval(eta: Smoothing, t):  # noqa: A001 - mirrors the public operation name
    """eta(t); exactly 0 outside the declared support."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("weights are evaluated at t >= 0")
    return eta(t)


# ---------------------------------------------------------------------------
# transforms


def fourier(eta: Smoothing, t: float) -> complex:
    """Fourier transform integral of e(-x t) eta(x) dx.

    The Gaussian uses its closed form on the whole line (the self-dual
    sqrt(2 pi) exp(-2 pi^2 t^2)); every other weight is integrated over its
    support by oscillatory quadrature.
    """
    t = float(t)
    if eta.kind == "gaussian":
        return complex(SQRT_2PI * math.exp(-2.0 * math.pi**2 * t * t))
    return _fourier_quad(eta, t)


def fourier_half_line(eta: Smoothing, t: float) -> complex:
    """Transform over t >= 0 only; for the Gaussian via the Dawson function."""
    t = float(t)
    if eta.kind == "gaussian":
        z = math.sqrt(2.0) * math.pi * t
        return complex(SQRT_HALF_PI * math.exp(-z * z), -math.sqrt(2.0) * dawsn(z))
    return _fourier_quad(eta, t)


def _fourier_quad(eta: Smoothing, t: float) -> complex:
    lo, hi = eta.support
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnsupportedError(f"transform of {eta.name} over an unbounded support")
    omega = 2.0 * math.pi * t
    re = im = 0.0
    for a, b in zip(eta.edges[:-1], eta.edges[1:]):
        if omega == 0.0:
            re += integrate.quad(eta, a, b, limit=400, epsabs=1e-13, epsrel=1e-12)[0]
            continue
        re += integrate.quad(eta, a, b, weight="cos", wvar=omega, limit=400, epsabs=1e-13)[0]
        im -= integrate.quad(eta, a, b, weight="sin", wvar=omega, limit=400, epsabs=1e-13)[0]
    return complex(re, im)


def _expm1_complex(z: np.ndarray) -> np.ndarray:
    a, b = z.real, z.imag
    return np.expm1(a) * np.cos(b) - 2.0 * np.sin(0.5 * b) ** 2 + 1j * np.exp(a) * np.sin(b)


def mellin_fdelta(delta: float, s: complex, rtol: float = 1e-8) -> complex:
    """Mellin transform at s of e(delta t) exp(-t^2/2), continued to Re s in [-1, 2].

    The integral is taken along a polyline contour 0 -> v1 -> v2 -> infinity:
    a steep first ray (which shrinks |t^(s-1)| near the origin), a segment to
    a point near a saddle of the integrand, and a final ray inside the sector
    where exp(-t^2/2) decays.  The contour is picked from a small family by
    minimizing the L1 mass of the integrand along it, which keeps
    cancellation low.  For Re s < 1/2 the first one or two Taylor terms at
    0 are subtracted on the first ray and added back in closed form; this
    is also what continues the transform to Re s <= 0.

    Raises PrecisionError when the quadrature does not settle to ``rtol``
    or when cancellation along the best contour leaves less accuracy than
    that (unless |F| <= 1e-30, where only absolute accuracy is promised).
    """
    s = complex(s)
    sigma = s.real
    if not -1.0 <= sigma <= 2.0:
        raise DomainError("mellin_fdelta needs Re(s) in [-1, 2]")
    if abs(s) < 1e-14 or abs(s + 1) < 1e-14:
        raise DomainError("the transform has a pole at s = 0 and s = -1")
    path = _choose_contour(float(delta), s)
    prev, mass = _contour_integral(delta, s, path, 1)
    cur = prev
    err = math.inf
    for level in (2, 4, 8):
        cur, mass = _contour_integral(delta, s, path, level)
        err = abs(cur - prev) + 64 * np.finfo(float).eps * mass
        if abs(cur) <= 1e-30 or err <= rtol * abs(cur):
            return cur
        prev = cur
    raise PrecisionError("mellin_fdelta did not reach the requested accuracy", err / max(abs(cur), 1e-300), cur)


def mellin_fdelta_with_error(delta: float, s: complex, rtol: float = 1e-8) -> tuple[complex, float]:
    """Like :func:`mellin_fdelta` but returns (value, absolute error estimate) instead of raising."""
    try:
        v = mellin_fdelta(delta, s, rtol)
        return v, rtol * abs(v) + 1e-30
    except PrecisionError as exc:
        return exc.value, exc.achieved * abs(exc.value)


def _saddles(delta: float, s: complex) -> list[complex]:
    c = 2j * math.pi * delta
    disc = np.sqrt(complex(c * c + 4 * (s - 1)))
    return [(c + disc) / 2, (c - disc) / 2]


def _crosses_cut(points: np.ndarray) -> bool:
    """True if a sampled polyline passes through the negative real axis."""
    im = points.imag
    flips = np.flatnonzero(np.sign(im[:-1]) * np.sign(im[1:]) < 0)
    for i in flips:
        a, b = points[i], points[i + 1]
        x = a.real - a.imag * (b.real - a.real) / (b.imag - a.imag)
        if x <= 0:
            return True
    return bool(np.any((np.abs(im) < 1e-300) & (points.real <= 0)))


def _choose_contour(delta: float, s: complex):
    tau = s.imag
    lean = math.copysign(1.0, tau if tau != 0 else (delta if delta != 0 else 1.0))
    lim = math.pi / 4 - 0.01
    cands = []
    for th in np.linspace(-lim, lim, 21):
        cands.append((float(th), 1.0, complex(math.cos(th), math.sin(th)), float(th)))
    anchors = [t0 for t0 in _saddles(delta, s) if abs(t0) > 1e-3]
    anchors += [2.0 * t0 for t0 in anchors] + [0.5 * t0 for t0 in anchors]
    psis = [lean * v for v in (0.8, 1.6, 2.4, 3.0)]
    for v2 in anchors:
        for psi in psis + [float(np.angle(v2))]:
            for rho in (0.25, max(0.3, 0.5 * abs(v2))):
                for th in np.linspace(-lim, lim, 7):
                    cands.append((psi, rho, complex(v2), float(th)))
    best, best_mass = None, math.inf
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for cand in cands:
            mass = _rough_mass(delta, s, cand)
            if mass < best_mass:
                best, best_mass = cand, mass
    return best


def _rough_mass(delta, s, path, n: int = 48) -> float:
    """Crude L1 mass of the integrand along a candidate contour (inf if the contour is invalid)."""
    psi, rho, v2, theta = path
    sigma = s.real
    c = 2j * math.pi * delta
    nsub = 0 if sigma >= 0.5 else (1 if sigma >= -0.5 else 2)
    direction = complex(math.cos(psi), math.sin(psi))
    v1 = rho * direction
    w_hi = math.log(rho)
    w = np.linspace(w_hi - 41.0 / (sigma + nsub), w_hi, n)
    z = np.exp(w) * direction
    expo = -0.5 * z * z + c * z
    core = np.exp(expo) if nsub == 0 else _expm1_complex(expo) - (c * z if nsub == 2 else 0)
    m1 = np.abs(core * np.exp(s * (w + 1j * psi)))
    mass = float(np.sum(m1) * (w[1] - w[0]))
    if nsub >= 1:
        mass += abs(np.exp(s * (w_hi + 1j * psi)) / s)
    u = np.linspace(0.0, 1.0, n)
    t2 = v1 + (v2 - v1) * u
    if _crosses_cut(t2):
        return math.inf
    mass += float(np.mean(np.abs(np.exp(-0.5 * t2 * t2 + c * t2 + (s - 1) * np.log(t2))))) * abs(v2 - v1)
    r = np.linspace(0.0, 40.0 + 2 * abs(v2), 4 * n)
    t3 = v2 + r * complex(math.cos(theta), math.sin(theta))
    if _crosses_cut(t3):
        return math.inf
    mass += float(np.sum(np.abs(np.exp(-0.5 * t3 * t3 + c * t3 + (s - 1) * np.log(t3))))) * (r[1] - r[0])
    return mass if math.isfinite(mass) else math.inf


class _BadContour(Exception):
    pass


def _segment_panels(length: float, freq, level: int, base: float = 0.5) -> np.ndarray:
    """Panel edges on [0, length] no wider than a half oscillation of the local frequency."""
    edges = [0.0]
    r = 0.0
    while r < length:
        r = min(length, r + min(base, math.pi / (freq(r) + 1.0)) / max(level, 0.5))
        edges.append(r)
    return np.asarray(edges)


def _contour_integral(delta, s, path, level, mass_only=False):
    psi, rho, v2, theta = path
    sigma, tau = s.real, s.imag
    c = 2j * math.pi * delta
    nsub = 0 if sigma >= 0.5 else (1 if sigma >= -0.5 else 2)
    nodes = 8 if level == 0 else 16
    lvl = max(level, 1)
    direction = complex(math.cos(psi), math.sin(psi))
    v1 = rho * direction

    def log_t(t):
        return np.log(t)

    # piece 1: t = e^{w} * direction, w from w_min to log(rho)
    decay = sigma + nsub
    w_hi = math.log(rho)
    w_min = w_hi - 41.0 / decay
    width = min(0.25, math.pi / (abs(tau) + 2 * math.pi * abs(delta) * rho + 1.0)) / lvl
    if level == 0:
        width = max(width, 0.5)
    wn, ww = panel_nodes(split_edges([w_min, w_hi], width), nodes)
    z = np.exp(wn) * direction
    expo = -0.5 * z * z + c * z
    if nsub == 0:
        core = np.exp(expo)
    else:
        core = _expm1_complex(expo)
        if nsub == 2:
            core = core - c * z
    f1 = core * np.exp(s * (wn + 1j * psi))
    closed = 0j
    if nsub >= 1:
        closed += np.exp(s * (w_hi + 1j * psi)) / s
    if nsub == 2:
        closed += c * np.exp((s + 1) * (w_hi + 1j * psi)) / (s + 1)

    # piece 2: straight segment v1 -> v2
    seg = v2 - v1
    seg_len = abs(seg)
    if seg_len > 1e-12:
        unit = seg / seg_len

        def freq2(r):
            t = v1 + r * unit
            return abs((-t + c + (s - 1) / t) * unit)

        e2 = _segment_panels(seg_len, freq2, level)
        rn, rw = panel_nodes(e2, nodes)
        t2 = v1 + rn * unit
        if _crosses_cut(np.concatenate(([v1], t2, [v2]))):
            raise _BadContour
        f2 = np.exp(-0.5 * t2 * t2 + c * t2 + (s - 1) * log_t(t2)) * unit
    else:
        rw = np.zeros(0)
        f2 = np.zeros(0, dtype=complex)

    # piece 3: ray v2 + r e^{i theta}
    unit3 = complex(math.cos(theta), math.sin(theta))
    probe = np.linspace(0.0, 60.0 + 2 * abs(v2), 6001)
    tp = v2 + probe * unit3
    if _crosses_cut(tp):
        raise _BadContour
    logmag = (-0.5 * tp * tp + c * tp + (s - 1) * np.log(tp)).real
    top = float(np.max(logmag))
    alive = np.flatnonzero(logmag > top - 46.0)
    r_max = float(probe[min(alive[-1] + 1, probe.size - 1)])

    def freq3(r):
        t = v2 + r * unit3
        return abs((-t + c + (s - 1) / t) * unit3)

    e3 = _segment_panels(r_max, freq3, level)
    rn3, rw3 = panel_nodes(e3, nodes)
    t3 = v2 + rn3 * unit3
    f3 = np.exp(-0.5 * t3 * t3 + c * t3 + (s - 1) * log_t(t3)) * unit3

    mass = (float(np.sum(ww * np.abs(f1))) + float(np.sum(rw * np.abs(f2)))
            + float(np.sum(rw3 * np.abs(f3))) + abs(closed))
    if mass_only:
        return mass
    value = np.sum(ww * f1) + np.sum(rw * f2) + np.sum(rw3 * f3) + closed
    return complex(value), mass


MELLIN_BOUND_SCALE = 4.226
MELLIN_BOUND_NARROW = 0.1065
MELLIN_BOUND_WIDE = 0.1598


def fdelta_bound_rhs(tau: float, delta: float) -> tuple[float, str]:
    """Right-hand side of the two-branch Mellin bound and the branch used."""
    if abs(tau) < 1.5 * (math.pi * delta) ** 2:
        return MELLIN_BOUND_SCALE * math.exp(-MELLIN_BOUND_NARROW * (tau / (math.pi * delta)) ** 2), "narrow"
    return MELLIN_BOUND_SCALE * math.exp(-MELLIN_BOUND_WIDE * abs(tau)), "wide"


def check_fdelta_bound(sigma: float, tau: float, delta: float) -> BoundReport:
    """Compare |F(s)| + |F(1-s)| with the explicit Gaussian Mellin bound."""
    if not 0.0 <= sigma <= 1.0:
        raise DomainError("sigma must lie in [0, 1]")
    if abs(tau) < max(100.0, 4 * math.pi**2 * abs(delta)):
        raise DomainError("need |tau| >= max(100, 4 pi^2 |delta|)")
    s = complex(sigma, tau)
    f1, e1 = mellin_fdelta_with_error(delta, s)
    f2, e2 = mellin_fdelta_with_error(delta, 1 - s)
    rhs, branch = fdelta_bound_rhs(tau, delta)
    # the error estimates are added so the comparison stays an honest upper bound
    rep = BoundReport(
        "mellin_gaussian", abs(f1) + abs(f2) + e1 + e2, rhs,
        terms={"abs_F_s": abs(f1), "abs_F_1ms": abs(f2), "quadrature_error": e1 + e2},
        params={"sigma": sigma, "tau": tau, "delta": delta, "branch": branch},
    )
    if not rep.holds:
        rep.flags.append("violation")
    return rep


# ---------------------------------------------------------------------------
# export


def sample(eta: Smoothing, points: int = 1001, t_max: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = eta.support
    t = np.linspace(0.0, hi if t_max is None else t_max, int(points))
    return t, eta(t)


def write_samples_csv(eta: Smoothing, path, points: int = 1001) -> None:
    t, v = sample(eta, points)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "eta"])
        for a, b in zip(t, v):
            w.writerow([repr(float(a)), repr(float(b))])


def write_weights_table_csv(weights, path, points: int = 1001, t_max: float | None = None) -> None:
    """Sample each weight at ``points`` equispaced t in [0, t_max]; one column per weight."""
    weights = list(weights)
    if points < 2:
        raise DomainError("need at least 2 sample points")
    if t_max is None:
        t_max = max(min(w.support[1], 6.0) for w in weights)
    ts = np.linspace(0.0, t_max, points)
    cols = [np.asarray(w(ts), dtype=float) for w in weights]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", *[w.name for w in weights]])
        for i, t in enumerate(ts):
            out.writerow([repr(float(t)), *[repr(float(c[i])) for c in cols]])
