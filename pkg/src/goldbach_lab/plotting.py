"""PNG figures for report runs (matplotlib, Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps the PNG bytes stable from run to run
_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
    return path


def expsum_figure(alphas, values, x: float, eta: str, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(alphas, np.abs(values) / x, lw=0.8)
    ax.set_xlabel("alpha")
    ax.set_ylabel("|S(alpha, x)| / x")
    ax.set_title(f"{eta} weight, x = {x:g}")
    return _save(fig, path)


def survey_figure(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for branch, marker in (("small_q", "o"), ("large_q", "s")):
        pts = [(r["q"], r["ratio"]) for r in rows if r["branch"] == branch]
        if pts:
            q, ratio = zip(*pts)
            ax.scatter(q, ratio, s=8, marker=marker, label=branch)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("q")
    ax.set_ylabel("measured / bound")
    ax.legend()
    return _save(fig, path)


def gain_figure(reports, path) -> Path:
    s = [r.params["s"] for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(s, [r.measured for r in reports], "o-", ms=3, label="measured ratio")
    ax.plot(s, [r.bound for r in reports], "--", label="prime-support factor")
    ax.plot(s, [r.extra["refined_factor"] for r in reports], ":", label="refined factor")
    ax.set_xlabel("s")
    ax.set_ylim(0, 1.5)
    ax.legend()
    return _save(fig, path)


def reps_figure(ns, ratios, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, ratios, ".", ms=3)
    ax.axhline(1.0, color="k", lw=0.6)
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("weighted count / predicted")
    return _save(fig, path)


def ladder_figure(primes, path) -> Path:
    primes = np.asarray(primes)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(primes[1:], np.diff(primes), lw=0.6)
    ax.set_xscale("log")
    ax.set_xlabel("rung")
    ax.set_ylabel("gap to next rung")
    return _save(fig, path)
