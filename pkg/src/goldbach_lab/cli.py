"""Command-line driver: verification runs, exponential-sum grids, bound surveys,
representation tables, ladders, large-sieve ratios and full reports.

Exit codes: 0 success, 2 mathematical failure, 3 resource limit, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import BUDGET_ENV
from .errors import (DomainError, LabError, PrecisionError, ResourceError, UnsupportedError,
                     VerificationFailure)

EXIT_OK = 0
EXIT_MATH = 2
EXIT_RESOURCE = 3
EXIT_USAGE = 64

COMMANDS = ("verify", "expsum", "bounds", "reps", "ladder-build", "sieve-ratio", "report")
EXPSUM_X_MAX = 1e7
REPS_RATIO_TOL = 0.01  # weighted count / (C0(n) n^2 / 2), calibrated at n = 1e4+1, 1e5+1, 1e6+1


class UsageError(LabError):
    """Bad command line or configuration file."""


@dataclass
class RunConfig:
    """Everything a command needs. Round-trips through :meth:`to_text`/:meth:`from_text`."""

    command: str = "verify"
    x: float = 1e5
    n_lo: int = 7
    n_hi: int = 100_001
    include_even: bool = False
    r: int = 10
    s: int = 10
    eta: str = "gaussian"
    kappa: float = 49.0
    R: float = 200.0
    grid: int = 1000
    alpha_lo: float = 0.0
    alpha_hi: float = 1.0
    samples: int = 1000
    seed: int = 0
    max_gap: int = 1_000_000
    ladder: str = ""
    workers: int = 1
    certified: bool = False
    checkpoint: str = ""
    out: str = "out"
    figures: bool = True
    budget_mb: float = 0.0  # 0 keeps the environment setting

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.workers < 1:
            raise UsageError("workers must be >= 1")
        if self.x <= 1:
            raise UsageError("x must exceed 1")
        if self.samples < 1:
            raise UsageError("samples must be >= 1")
        if self.grid < 1:
            raise UsageError("grid must be >= 1")
        if self.n_lo > self.n_hi:
            raise UsageError("n_lo must not exceed n_hi")
        if self.s < 1 or self.r < 1:
            raise UsageError("r and s must be >= 1")
        if self.budget_mb < 0:
            raise UsageError("budget_mb must be >= 0")

    # flat "key = value" text, one setting per line, '#' starts a comment
    def to_text(self) -> str:
        lines = [f"# goldbach-lab {__version__} run configuration"]
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {_format_value(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**parse_config_text(text))


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind == "int":
            v = float(raw) if any(c in raw for c in ".eE") else int(raw)
            if v != int(v):
                raise ValueError(raw)
            return int(v)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise UsageError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise UsageError(f"config line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


# ---------------------------------------------------------------------------
# helpers


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _smoothing(cfg: RunConfig):
    from . import smoothing

    return smoothing.by_name(cfg.eta, R=cfg.R, kappa=cfg.kappa)


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True, default=_fmt) + "\n")


def _get_ladder(cfg: RunConfig, limit: int):
    from . import ladder

    if cfg.ladder:
        lad = ladder.Ladder.load(cfg.ladder, certify=cfg.certified)
        if lad.limit < limit:
            raise UsageError(f"ladder in {cfg.ladder} only reaches {lad.limit}")
        return lad
    return ladder.build_ladder(max(limit, 7), max(8, min(cfg.max_gap, 2 ** 26)))


# ---------------------------------------------------------------------------
# commands


def cmd_verify(cfg: RunConfig) -> int:
    """Witness every odd n in [n_lo, n_hi]; summary JSON goes to out/verify_summary.json."""
    from . import ladder

    lo = cfg.n_lo | 1
    hi = cfg.n_hi if cfg.n_hi % 2 else cfg.n_hi - 1
    if lo < 7:
        lo = 7
    if hi < lo:
        raise UsageError("no odd n >= 7 in the range")
    lad = _get_ladder(cfg, hi)
    summary = ladder.verify_range(lo, hi, lad, checkpoint=cfg.checkpoint or None, workers=cfg.workers,
                                  seed=cfg.seed)
    expected = (hi - lo) // 2 + 1
    data = summary.to_dict()
    data["expected"] = expected
    data["complete"] = summary.verified == expected
    out = _out_dir(cfg)
    _dump_json(out / "verify_summary.json", data)
    print(f"verified {summary.verified} odd n in [{lo}, {hi}]; max reduction {summary.max_reduction}")
    print(f"{summary.seconds:.2f} s, {summary.throughput:.3g} n/s", file=sys.stderr)
    if not data["complete"]:
        print(f"incomplete: {summary.verified} of {expected} witnessed", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def _expsum_rows(args):
    from . import expsum, smoothing

    name, R, kappa, x, alphas = args
    eta = smoothing.by_name(name, R=R, kappa=kappa)
    return [expsum.s_eta(eta, a, x).value for a in alphas]


def expsum_grid(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    """Alphas and exactly rounded sums; the split across workers cannot change any value."""
    _smoothing(cfg)  # reject unknown names before forking
    if cfg.x > EXPSUM_X_MAX:
        raise ResourceError(f"expsum grid limited to x <= {EXPSUM_X_MAX:g}")
    from .config import check_budget

    check_budget(int(64 * 8 * cfg.x), "expsum grid")
    alphas = np.linspace(cfg.alpha_lo, cfg.alpha_hi, cfg.grid, endpoint=False)
    blocks = [alphas[i : i + 32] for i in range(0, alphas.size, 32)]
    jobs = [(cfg.eta, cfg.R, cfg.kappa, cfg.x, b) for b in blocks]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(_expsum_rows, jobs))
    else:
        parts = [_expsum_rows(j) for j in jobs]
    return alphas, np.array([v for p in parts for v in p], dtype=complex)


def _expsum_table(alphas, values) -> list[list[str]]:
    return [[repr(float(a)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))]
            for a, v in zip(alphas, values)]


def cmd_expsum(cfg: RunConfig) -> int:
    """CSV of S_eta(alpha, x) over an alpha grid: out/expsum.csv (alpha, re, im, abs)."""
    alphas, values = expsum_grid(cfg)
    out = _out_dir(cfg)
    _write_rows(out / "expsum.csv", ["alpha", "re", "im", "abs"],
                _expsum_table(alphas, values))
    print(f"wrote {alphas.size} rows to {out / 'expsum.csv'}")
    return EXIT_OK


def cmd_bounds(cfg: RunConfig) -> int:
    """Minor-arc survey plus large-sieve and major-arc comparisons."""
    from . import majorarc, minorarc, sieve

    out = _out_dir(cfg)
    survey = minorarc.minor_arc_survey(cfg.x, cfg.samples, seed=cfg.seed, r=cfg.r, workers=cfg.workers)
    survey.write_csv(out / "survey.csv")
    summary = dict(survey.summary)
    if cfg.certified:
        rows, enclosed = [], 0
        for row in survey.rows:
            enc = minorarc.theorem_bound_enclosure(cfg.x, row["q"], row["delta"])
            inside = enc is not None and enc.contains(row["bound"])
            enclosed += inside
            rows.append([repr(row["alpha"]), row["q"], repr(row["delta"]), repr(row["bound"]),
                         repr(enc.lo) if enc else "nan", repr(enc.hi) if enc else "nan", str(inside).lower()])
        _write_rows(out / "survey_certified.csv",
                    ["alpha", "q", "delta", "bound", "bound_lo", "bound_hi", "enclosed"], rows)
        summary["certified"] = {"rows": len(rows), "enclosed": enclosed}
    if cfg.x <= 1e6 and cfg.s <= sieve.GAIN_S_LIMIT:
        gain = sieve.prime_support_gain(cfg.s, cfg.x)
        sieve.write_gain_csv([gain], out / "sieve_gain.csv")
        summary["sieve_gain"] = {"s": cfg.s, "measured": gain.measured, "bound": gain.bound,
                                 "holds": gain.holds, "flags": gain.flags}
    eta = majorarc.sm.by_name("gaussian")
    estimates = [majorarc.major_estimate(eta, q, d, cfg.x) for q in range(1, min(cfg.r, 10) + 1)
                 for d in (0.0, 0.5, 1.0, 2.0)]
    majorarc.write_estimates_csv(estimates, out / "major_estimates.csv")
    _dump_json(out / "survey.json", summary)
    q = summary.get("quantiles", {})
    print(f"survey: {summary['rows']} minor-arc rows, {summary['excluded_major']} on major arcs; "
          f"median ratio {q.get('0.5', math.nan):.4g}")
    if cfg.certified and summary["certified"]["enclosed"] != summary["certified"]["rows"]:
        print("certified rerun failed to enclose some bounds", file=sys.stderr)
        return EXIT_MATH
    return EXIT_OK


def reps_rows(cfg: RunConfig) -> list[list]:
    from . import expsum, majorarc

    rows = []
    step = 1 if cfg.include_even else 2
    start = max(cfg.n_lo, 7)
    if step == 2 and start % 2 == 0:
        start += 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", expsum.EvenTargetWarning)
        for n in range(start, cfg.n_hi + 1, step):
            rc = expsum.count_reps(n)
            predicted = majorarc.singular_series(n).value * n * n / 2
            ratio = rc.weighted / predicted if predicted else math.nan
            flag = "even" if n % 2 == 0 else ""
            rows.append([n, rc.unweighted, repr(rc.weighted), repr(predicted), repr(ratio), flag])
    return rows


def cmd_reps(cfg: RunConfig) -> int:
    """Representation counts against C0(n) n^2 / 2: out/reps.csv."""
    if (cfg.n_hi - cfg.n_lo) > 100_000 and cfg.n_hi > 20_000:
        raise ResourceError("reps range too long for per-n convolutions")
    rows = reps_rows(cfg)
    out = _out_dir(cfg)
    _write_rows(out / "reps.csv", ["n", "unweighted", "weighted", "predicted_main_term", "ratio", "flag"], rows)
    print(f"wrote {len(rows)} rows to {out / 'reps.csv'}")
    return EXIT_OK


def cmd_ladder_build(cfg: RunConfig) -> int:
    from . import ladder

    limit = max(cfg.n_hi, 7)
    lad = ladder.build_ladder(limit, max(8, cfg.max_gap))
    out = _out_dir(cfg)
    path = out / "ladder.bin"
    lad.save(path)
    _dump_json(out / "ladder.json", {"limit": lad.limit, "max_gap": lad.max_gap, "rungs": int(lad.primes.size),
                                     "proth_rungs": lad.proth_rungs, "sha256": lad.digest})
    print(f"{lad.primes.size} rungs up to {int(lad.primes[-1])} ({lad.proth_rungs} Proth), sha256 {lad.digest}")
    return EXIT_OK


def cmd_sieve_ratio(cfg: RunConfig) -> int:
    """Prime-support large-sieve ratio for s = 1..s at scale x: out/sieve_gain.csv."""
    from . import sieve

    reports = [sieve.prime_support_gain(s, cfg.x) for s in range(1, cfg.s + 1)]
    out = _out_dir(cfg)
    sieve.write_gain_csv(reports, out / "sieve_gain.csv")
    worst = max(reports, key=lambda r: r.slack if math.isfinite(r.slack) else -1)
    print(f"s = 1..{cfg.s}: all within the prime-support factor: {all(r.holds for r in reports)}; "
          f"largest slack {worst.slack:.4g} at s = {worst.params['s']}")
    return EXIT_OK if all(r.holds for r in reports) else EXIT_MATH


def cmd_report(cfg: RunConfig) -> int:
    """Compact run of every experiment with CSVs and, unless disabled, PNG figures."""
    from . import ladder, minorarc, sieve, smoothing

    out = _out_dir(cfg)
    files = []
    weights = [smoothing.by_name(k) for k in ("gaussian", "t2_gaussian", "eta1", "eta2", "eta_circ", "h")]
    smoothing.write_weights_table_csv(weights, out / "weights.csv", points=max(cfg.grid, 2), t_max=2.5)
    files.append("weights.csv")
    alphas, values = expsum_grid(cfg)
    _write_rows(out / "expsum.csv", ["alpha", "re", "im", "abs"],
                _expsum_table(alphas, values))
    files.append("expsum.csv")

    survey = minorarc.minor_arc_survey(cfg.x, cfg.samples, seed=cfg.seed, r=cfg.r, workers=cfg.workers)
    survey.write_csv(out / "survey.csv")
    survey.write_json(out / "survey.json")
    files += ["survey.csv", "survey.json"]

    gains = [sieve.prime_support_gain(s, cfg.x) for s in range(1, cfg.s + 1)]
    sieve.write_gain_csv(gains, out / "sieve_gain.csv")
    files.append("sieve_gain.csv")

    rep_rows = reps_rows(cfg)
    _write_rows(out / "reps.csv", ["n", "unweighted", "weighted", "predicted_main_term", "ratio", "flag"], rep_rows)
    files.append("reps.csv")

    hi = cfg.n_hi if cfg.n_hi % 2 else cfg.n_hi - 1
    lad = _get_ladder(cfg, hi)
    summary = ladder.verify_range(7, max(hi, 7), lad, workers=cfg.workers, seed=cfg.seed)
    _dump_json(out / "verify_summary.json", summary.to_dict())
    files.append("verify_summary.json")

    if cfg.figures:
        from . import plotting

        plotting.expsum_figure(alphas, values, cfg.x, cfg.eta, out / "expsum.png")
        plotting.survey_figure(survey.rows, out / "survey.png")
        plotting.gain_figure(gains, out / "sieve_gain.png")
        odd = [r for r in rep_rows if r[5] != "even"]
        plotting.reps_figure([r[0] for r in odd], [float(r[4]) for r in odd], out / "reps.png")
        plotting.ladder_figure(lad.primes, out / "ladder_gaps.png")
        files += ["expsum.png", "survey.png", "sieve_gain.png", "reps.png", "ladder_gaps.png"]
    (out / "run.cfg").write_text(cfg.to_text())
    files.append("run.cfg")
    print("\n".join(str(out / f) for f in files))
    return EXIT_OK


HANDLERS = {"verify": cmd_verify, "expsum": cmd_expsum, "bounds": cmd_bounds, "reps": cmd_reps,
            "ladder-build": cmd_ladder_build, "sieve-ratio": cmd_sieve_ratio, "report": cmd_report}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_arg(text: str) -> int:
    """Integer flag that also accepts integral scientific notation such as 1e8."""
    try:
        v = float(text) if any(c in text for c in ".eE") else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--x", type=float, help="scale x")
    common.add_argument("--n-lo", dest="n_lo", type=_int_arg)
    common.add_argument("--n-hi", dest="n_hi", type=_int_arg)
    common.add_argument("--include-even", dest="include_even", action="store_true")
    common.add_argument("--r", type=_int_arg, help="major-arc denominator cutoff")
    common.add_argument("--s", type=_int_arg, help="large-sieve denominator cutoff")
    common.add_argument("--eta", help="smoothing name")
    common.add_argument("--kappa", type=float)
    common.add_argument("--R", type=float)
    common.add_argument("--grid", type=_int_arg, help="alpha grid points")
    common.add_argument("--alpha-lo", dest="alpha_lo", type=float)
    common.add_argument("--alpha-hi", dest="alpha_hi", type=float)
    common.add_argument("--samples", type=_int_arg)
    common.add_argument("--seed", type=_int_arg)
    common.add_argument("--max-gap", dest="max_gap", type=_int_arg)
    common.add_argument("--ladder", help="prebuilt ladder file")
    common.add_argument("--workers", type=_int_arg)
    common.add_argument("--certified", action="store_true")
    common.add_argument("--checkpoint")
    common.add_argument("--out", help="output directory")
    common.add_argument("--no-figures", dest="figures", action="store_false")
    common.add_argument("--budget-mb", dest="budget_mb", type=float)

    parser = _Parser(prog="goldbach-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "verify": "witness every odd n in [n-lo, n-hi] with the prime ladder",
        "expsum": "S_eta(alpha, x) over an alpha grid",
        "bounds": "minor-arc survey with sieve and major-arc comparisons",
        "reps": "three-prime representation counts against the main term",
        "ladder-build": "build and save a prime ladder up to n-hi",
        "sieve-ratio": "prime-support large-sieve ratios for s = 1..s",
        "report": "small run of everything, CSVs plus PNG figures",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], argument_default=argparse.SUPPRESS)
    return parser


def config_from_args(argv) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    values = {}
    cfg_path = args.pop("config", None)
    if cfg_path:
        try:
            text = Path(cfg_path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        values.update(parse_config_text(text))
    values.update(args)
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    if cfg.budget_mb:
        os.environ[BUDGET_ENV] = repr(cfg.budget_mb)
    return HANDLERS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, UnsupportedError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        if getattr(exc, "state", None):
            print(json.dumps(exc.state, default=str), file=sys.stderr)
        return EXIT_MATH
    except PrecisionError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
