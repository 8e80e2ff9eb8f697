"""Random expression trees for containment fuzzing of the interval evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from goldbach_lab import rigor as rg
from goldbach_lab.errors import DomainError

UNARY = ("exp", "log", "sin", "cos", "sqrt", "abs", "neg")
BINARY = ("+", "-", "*", "/")


def random_expr(rng: np.random.Generator, depth: int, names=("x", "y")) -> rg.Expr:
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return rg.Var(str(rng.choice(names)))
        return rg.Const(rg.Interval.point(float(np.round(rng.normal(0, 3), 3))))
    roll = rng.random()
    if roll < 0.45:
        op = str(rng.choice(BINARY))
        return rg.BinOp(op, random_expr(rng, depth - 1, names), random_expr(rng, depth - 1, names))
    if roll < 0.85:
        return rg.Func(str(rng.choice(UNARY)), random_expr(rng, depth - 1, names))
    return rg.Pow(random_expr(rng, depth - 1, names), int(rng.integers(0, 5)))


def random_box(rng: np.random.Generator) -> rg.Interval:
    center = float(rng.normal(0, 4))
    half = float(10 ** rng.uniform(-12, 0.5))
    return rg.Interval(center - half, center + half)


@dataclass
class FuzzOutcome:
    cases: int
    evaluated: int
    rejected: int
    escapes: list


def fuzz(cases: int, seed: int, points: int = 2, depth: int = 4) -> FuzzOutcome:
    """Evaluate random trees on random boxes and check high-precision point values stay inside."""
    rng = np.random.default_rng(seed)
    evaluated = rejected = 0
    escapes = []
    for _ in range(cases):
        expr = random_expr(rng, depth)
        boxes = {"x": random_box(rng), "y": random_box(rng)}
        try:
            enc = rg.interval_eval(expr, boxes)
        except (DomainError, OverflowError, ZeroDivisionError):
            rejected += 1
            continue
        evaluated += 1
        for _ in range(points):
            vals = {k: b.lo + (b.hi - b.lo) * float(rng.random()) for k, b in boxes.items()}
            vals = {k: min(max(v, boxes[k].lo), boxes[k].hi) for k, v in vals.items()}
            with mpmath.workdps(60):
                exact = rg.mp_eval(expr, vals, digits=60)
                if isinstance(exact, mpmath.mpc) or not mpmath.isfinite(exact):
                    if isinstance(exact, mpmath.mpf) and mpmath.isinf(exact):
                        ok = (exact > 0 and enc.hi == math.inf) or (exact < 0 and enc.lo == -math.inf)
                    else:
                        ok = False
                else:
                    ok = mpmath.mpf(enc.lo) <= exact <= mpmath.mpf(enc.hi)
            if not ok:
                escapes.append((repr(expr), boxes, vals, str(exact), enc))
    return FuzzOutcome(cases, evaluated, rejected, escapes)
