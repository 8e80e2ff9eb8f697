"""Small Gauss-Legendre helpers shared by the numerical modules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def panel_nodes(edges, n: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on consecutive panels [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def split_edges(points, max_width: float) -> np.ndarray:
    """Refine a sorted list of breakpoints so no panel is wider than ``max_width``."""
    points = np.asarray(points, dtype=float)
    out = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        k = max(1, int(np.ceil((b - a) / max_width)))
        out.append(np.linspace(a, b, k + 1)[1:])
    return np.concatenate(out)
