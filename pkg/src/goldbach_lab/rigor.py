"""Interval arithmetic over expression trees, bisection maximization and
enclosure quadrature.

Endpoints are doubles. Every operation rounds outward:

* ``+ - * /`` are done in round-to-nearest and then moved one ulp outward,
  which covers the half-ulp rounding error;
* integer powers are computed exactly on rationals and converted with one
  ulp of outward slack;
* ``exp log sin cos sqrt`` are evaluated in software (mpmath) at 80 bits,
  whose error is far below half an ulp of the double result, and then moved
  one ulp outward. Hardware transcendental instructions are never used for
  endpoints.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import DomainError

WORK_BITS = 80
_INF = math.inf


def _down(v: float) -> float:
    return math.nextafter(v, -_INF)


def _up(v: float) -> float:
    return math.nextafter(v, _INF)


def _sum_bounds(a: float, b: float) -> tuple[float, float]:
    # TwoSum: the rounding error of a + b is itself a double
    s = a + b
    if not math.isfinite(s):
        if math.isfinite(a) and math.isfinite(b):  # overflow
            return (_down(s), s) if s > 0 else (s, _up(s))
        return s, s
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err == 0:
        return s, s
    return (s, _up(s)) if err > 0 else (_down(s), s)


def _product_bounds(a: float, b: float, divide: bool) -> tuple[float, float]:
    value = a / b if divide else a * b
    if not all(map(math.isfinite, (a, b, value))):
        if math.isnan(value):  # 0 * inf: only reachable with unbounded intervals
            value = 0.0
        return _down(value), _up(value)
    exact = Fraction(a) / Fraction(b) if divide else Fraction(a) * Fraction(b)
    fv = Fraction(value)
    if fv == exact:
        return value, value
    return (value, _up(value)) if fv < exact else (_down(value), value)


def _with_prec(fn, *args):
    with mpmath.workprec(WORK_BITS):
        return fn(*args)


def _mp_down(v) -> float:
    return _down(float(v))


def _mp_up(v) -> float:
    return _up(float(v))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainError("interval endpoint is NaN")
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: float) -> "Interval":
        v = float(v)
        return cls(v, v)

    @classmethod
    def around(cls, v: float) -> "Interval":
        """Smallest double interval sure to contain a decimal or rounded value."""
        v = float(v)
        return cls(_down(v), _up(v))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def split(self) -> tuple["Interval", "Interval"]:
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)

    # arithmetic ------------------------------------------------------------

    def __add__(self, o):
        o = as_interval(o)
        return Interval(_sum_bounds(self.lo, o.lo)[0], _sum_bounds(self.hi, o.hi)[1])

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o):
        o = as_interval(o)
        return Interval(_sum_bounds(self.lo, -o.hi)[0], _sum_bounds(self.hi, -o.lo)[1])

    def __rsub__(self, o):
        return as_interval(o) - self

    def __mul__(self, o):
        o = as_interval(o)
        bounds = [_product_bounds(a, b, False)
                  for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(min(b[0] for b in bounds), max(b[1] for b in bounds))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = as_interval(o)
        if o.lo <= 0.0 <= o.hi:
            raise DomainError("division by an interval containing 0")
        bounds = [_product_bounds(a, b, True)
                  for a in (self.lo, self.hi) for b in (o.lo, o.hi)]
        return Interval(min(b[0] for b in bounds), max(b[1] for b in bounds))

    def __rtruediv__(self, o):
        return as_interval(o) / self

    def __pow__(self, n: int):
        return ipow(self, n)


def as_interval(v) -> Interval:
    if isinstance(v, Interval):
        return v
    return Interval.point(float(v))


PI = Interval(math.pi, _up(math.pi))  # math.pi is the double just below pi
E = Interval(_down(math.e), _up(math.e))


def _frac_down(f: Fraction) -> float:
    v = float(f)
    return v if Fraction(v) <= f else _down(v)


def _frac_up(f: Fraction) -> float:
    v = float(f)
    return v if Fraction(v) >= f else _up(v)


def ipow(x: Interval, n: int) -> Interval:
    if not isinstance(n, int):
        raise DomainError("only integer powers are supported")
    if n == 0:
        return Interval(1.0, 1.0)
    if n < 0:
        return Interval(1.0, 1.0) / ipow(x, -n)
    lo, hi = Fraction(x.lo), Fraction(x.hi)
    if n % 2 == 1 or lo >= 0:
        a, b = lo**n, hi**n
    elif hi <= 0:
        a, b = hi**n, lo**n
    else:
        a, b = Fraction(0), max(lo**n, hi**n)
    return Interval(_frac_down(a), _frac_up(b))


def iexp(x: Interval) -> Interval:
    lo = _with_prec(mpmath.exp, mpmath.mpf(x.lo))
    hi = _with_prec(mpmath.exp, mpmath.mpf(x.hi))
    return Interval(max(0.0, _mp_down(lo)), _mp_up(hi))


def ilog(x: Interval) -> Interval:
    if x.lo <= 0:
        raise DomainError("log of an interval reaching 0 or below")
    return Interval(_mp_down(_with_prec(mpmath.log, mpmath.mpf(x.lo))),
                    _mp_up(_with_prec(mpmath.log, mpmath.mpf(x.hi))))


def isqrt(x: Interval) -> Interval:
    if x.lo < 0:
        raise DomainError("sqrt of an interval reaching below 0")
    lo = _with_prec(mpmath.sqrt, mpmath.mpf(x.lo))
    hi = _with_prec(mpmath.sqrt, mpmath.mpf(x.hi))
    return Interval(max(0.0, _mp_down(lo)), _mp_up(hi))


def iabs(x: Interval) -> Interval:
    if x.lo >= 0:
        return x
    if x.hi <= 0:
        return -x
    return Interval(0.0, max(-x.lo, x.hi))


def _trig(x: Interval, fn, peak_phase) -> Interval:
    """Range of sin or cos; ``peak_phase`` is where fn = 1 (its minima sit pi later)."""
    if x.width >= 7.0:
        return Interval(-1.0, 1.0)
    with mpmath.workprec(WORK_BITS + 40):
        lo, hi = mpmath.mpf(x.lo), mpmath.mpf(x.hi)
        two_pi = 2 * mpmath.pi

        def hits(phase):
            k = mpmath.ceil((lo - phase) / two_pi)
            return phase + k * two_pi <= hi

        has_max = hits(peak_phase)
        has_min = hits(peak_phase + mpmath.pi)
        a, b = fn(lo), fn(hi)
    top = 1.0 if has_max else min(1.0, _mp_up(max(a, b)))
    bottom = -1.0 if has_min else max(-1.0, _mp_down(min(a, b)))
    return Interval(bottom, top)


def isin(x: Interval) -> Interval:
    return _trig(x, mpmath.sin, mpmath.pi / 2)


def icos(x: Interval) -> Interval:
    return _trig(x, mpmath.cos, mpmath.mpf(0))


# ---------------------------------------------------------------------------
# expression trees


class Expr:
    """Node of an expression tree; build with operators and the helper functions."""

    def __add__(self, o):
        return BinOp("+", self, wrap(o))

    def __radd__(self, o):
        return BinOp("+", wrap(o), self)

    def __sub__(self, o):
        return BinOp("-", self, wrap(o))

    def __rsub__(self, o):
        return BinOp("-", wrap(o), self)

    def __mul__(self, o):
        return BinOp("*", self, wrap(o))

    def __rmul__(self, o):
        return BinOp("*", wrap(o), self)

    def __truediv__(self, o):
        return BinOp("/", self, wrap(o))

    def __rtruediv__(self, o):
        return BinOp("/", wrap(o), self)

    def __neg__(self):
        return Func("neg", self)

    def __pow__(self, n: int):
        return Pow(self, int(n))

    def digest(self) -> str:
        return hashlib.sha256(repr(self).encode()).hexdigest()[:16]

    def variables(self) -> set[str]:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Interval

    def __repr__(self):
        v = self.value
        return repr(v.lo) if v.lo == v.hi else f"[{v.lo!r},{v.hi!r}]"

    def variables(self):
        return set()


@dataclass(frozen=True, eq=False)
class Var(Expr):
    name: str

    def __repr__(self):
        return self.name

    def variables(self):
        return {self.name}


@dataclass(frozen=True, eq=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"

    def variables(self):
        return self.left.variables() | self.right.variables()


@dataclass(frozen=True, eq=False)
class Func(Expr):
    name: str
    arg: Expr

    def __repr__(self):
        return f"{self.name}({self.arg!r})"

    def variables(self):
        return self.arg.variables()


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    n: int

    def __repr__(self):
        return f"({self.base!r})^{self.n}"

    def variables(self):
        return self.base.variables()


def wrap(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Interval):
        return Const(v)
    return Const(Interval.point(float(v)))


def exp(e) -> Expr:
    return Func("exp", wrap(e))


def log(e) -> Expr:
    return Func("log", wrap(e))


def sin(e) -> Expr:
    return Func("sin", wrap(e))


def cos(e) -> Expr:
    return Func("cos", wrap(e))


def sqrt(e) -> Expr:
    return Func("sqrt", wrap(e))


def fabs(e) -> Expr:
    return Func("abs", wrap(e))


FUNCS = {"exp": iexp, "log": ilog, "sin": isin, "cos": icos, "sqrt": isqrt, "abs": iabs,
         "neg": lambda x: -x}
BINOPS = {"+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b, "/": lambda a, b: a / b}


def interval_eval(expr: Expr, bindings: dict) -> Interval:
    """Enclosure of the range of ``expr`` over the boxes in ``bindings``."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in bindings:
            raise DomainError(f"unbound variable {expr.name}")
        return as_interval(bindings[expr.name])
    if isinstance(expr, BinOp):
        return BINOPS[expr.op](interval_eval(expr.left, bindings), interval_eval(expr.right, bindings))
    if isinstance(expr, Func):
        return FUNCS[expr.name](interval_eval(expr.arg, bindings))
    if isinstance(expr, Pow):
        return ipow(interval_eval(expr.base, bindings), expr.n)
    raise DomainError(f"unknown node {expr!r}")


# Beyond this the point value of exp is far outside the double range; GMP aborts on
# the exponent of exp(exp(big)), so the result is replaced by inf or a positive
# value below every positive double.
_MP_EXP_CAP = 1e15


def _mp_exp(v):
    if v > _MP_EXP_CAP:
        return mpmath.inf
    if v < -_MP_EXP_CAP:
        return mpmath.ldexp(mpmath.mpf(1), -(2**62))
    return mpmath.exp(v)


_MP_FUNCS = {"exp": _mp_exp, "log": mpmath.log, "sin": mpmath.sin, "cos": mpmath.cos, "sqrt": mpmath.sqrt,
             "abs": abs, "neg": lambda v: -v}


def mp_eval(expr: Expr, values: dict, digits: int = 50):
    """Point value in mpmath at ``digits`` decimal digits (constants at their midpoints)."""
    with mpmath.workdps(digits):
        def go(e):
            if isinstance(e, Const):
                return (mpmath.mpf(e.value.lo) + mpmath.mpf(e.value.hi)) / 2
            if isinstance(e, Var):
                return mpmath.mpf(values[e.name])
            if isinstance(e, BinOp):
                a, b = go(e.left), go(e.right)
                return {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b != 0 else mpmath.inf}[e.op]
            if isinstance(e, Func):
                return _MP_FUNCS[e.name](go(e.arg))
            if isinstance(e, Pow):
                return go(e.base) ** e.n
            raise DomainError(f"unknown node {e!r}")

        return go(expr)


# ---------------------------------------------------------------------------
# bisection maximization


@dataclass
class MaxEnclosure:
    enclosure: Interval
    argmax_box: Interval
    boxes: int
    converged: bool
    expr_hash: str
    domain: Interval

    def to_json(self) -> str:
        return json.dumps({"expression": self.expr_hash, "domain": [self.domain.lo, self.domain.hi],
                           "enclosure": [self.enclosure.lo, self.enclosure.hi],
                           "argmax_box": [self.argmax_box.lo, self.argmax_box.hi],
                           "nodes": self.boxes, "converged": self.converged}, sort_keys=True)


def bisection_max(expr: Expr, domain: Interval, tol: float = 1e-6, var: str | None = None,
                  max_boxes: int = 200_000) -> MaxEnclosure:
    """Certified enclosure of max over ``domain`` of a one-variable expression.

    The lower end comes from interval evaluations at single points, the
    upper end from the largest box enclosure still alive; boxes whose upper
    bound falls below the certified lower bound are discarded.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    names = sorted(expr.variables())
    if var is None:
        if len(names) > 1:
            raise DomainError(f"pick one of {names}")
        var = names[0] if names else "t"

    def f(box):
        return interval_eval(expr, {var: box})

    best_lo = -math.inf
    for t in (domain.lo, domain.mid, domain.hi):
        best_lo = max(best_lo, f(Interval.point(t)).lo)
    heap = [(-f(domain).hi, domain.lo, domain.hi)]
    evaluated = 1
    converged = False
    while heap:
        neg_up, a, b = heap[0]
        upper = -neg_up
        if upper - best_lo <= tol:
            converged = True
            break
        if evaluated >= max_boxes or b - a <= 4 * math.ulp(max(abs(a), abs(b), 1e-300)):
            break
        heapq.heappop(heap)
        box = Interval(a, b)
        for child in box.split():
            best_lo = max(best_lo, f(Interval.point(child.mid)).lo)
            up = f(child).hi
            evaluated += 1
            if up >= best_lo:
                heapq.heappush(heap, (-up, child.lo, child.hi))
        # prune in bulk now and then
        if len(heap) > 4096:
            heap = [h for h in heap if -h[0] >= best_lo]
            heapq.heapify(heap)
    upper = -heap[0][0] if heap else best_lo
    top_box = Interval(heap[0][1], heap[0][2]) if heap else domain
    return MaxEnclosure(Interval(best_lo, max(upper, best_lo)), top_box, evaluated, converged, expr.digest(), domain)


# ---------------------------------------------------------------------------
# enclosure quadrature


def enclosure_quadrature(expr: Expr, domain: Interval, parts: int = 64, var: str | None = None) -> Interval:
    """Interval sure to contain the integral over ``domain``: sum of width x range per part."""
    if parts < 1:
        raise DomainError("parts must be >= 1")
    names = sorted(expr.variables())
    var = var or (names[0] if names else "t")
    lo, hi = domain.lo, domain.hi
    edges = [lo + (hi - lo) * i / parts for i in range(parts)] + [hi]
    total = Interval(0.0, 0.0)
    for a, b in zip(edges[:-1], edges[1:]):
        width = Interval(b, b) - Interval(a, a)
        total = total + width * interval_eval(expr, {var: Interval(a, b)})
    return total


def eta_circ_expr(var: str = "t") -> Expr:
    """t^3 (2 - t)^3 exp(-(t - 1)^2 / 2) on [0, 2]."""
    t = Var(var)
    return Pow(t, 3) * Pow(2 - t, 3) * exp(-(Pow(t - 1, 2)) / 2)


def export_result(expr: Expr, domain: Interval, enclosure: Interval, nodes: int) -> str:
    return json.dumps({"expression": expr.digest(), "text": repr(expr), "domain": [domain.lo, domain.hi],
                       "enclosure": [enclosure.lo, enclosure.hi], "nodes": nodes}, sort_keys=True)
