import csv
import json
import subprocess
import sys

import pytest

from goldbach_lab import cli
from goldbach_lab.cli import RunConfig, main


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


# --- exit codes -----------------------------------------------------------------

def test_malformed_config_exit_usage(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("x = 1e5\nthis line has no separator\n")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_USAGE
    bad.write_text("colour = blue\n")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_USAGE
    bad.write_text("samples = many\n")
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_USAGE
    assert main(["verify", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_USAGE


def test_unknown_flag_and_command_exit_usage(tmp_path, capsys):
    assert main(["verify", "--bogus"]) == cli.EXIT_USAGE
    assert main(["frobnicate"]) == cli.EXIT_USAGE
    assert main([]) == cli.EXIT_USAGE


def test_unknown_smoothing_exit_usage(tmp_path):
    assert main(["expsum", "--eta", "nonesuch", "--grid", "4", "--x", "1000", "--out", str(tmp_path)]) == 64


def test_zero_samples_exit_usage(tmp_path):
    assert main(["bounds", "--samples", "0", "--out", str(tmp_path)]) == 64


def test_budget_exit_resource(tmp_path, monkeypatch):
    assert main(["expsum", "--x", "1e8", "--grid", "2", "--out", str(tmp_path)]) == cli.EXIT_RESOURCE
    monkeypatch.setenv("GOLDBACH_LAB_BUDGET_MB", "2048")
    assert main(["expsum", "--x", "1e6", "--grid", "2", "--budget-mb", "1", "--out", str(tmp_path)]) == 3


def test_console_script_exit_code(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "goldbach_lab.cli", "expsum", "--samples", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 64 and "samples" in proc.stderr


# --- configuration ---------------------------------------------------------------

def test_config_round_trip():
    cfg = RunConfig(command="bounds", x=123456.75, n_lo=9, n_hi=99, include_even=True, eta="eta2",
                    kappa=0.1 + 0.2, samples=17, certified=True, out="some/dir", budget_mb=512.5)
    back = RunConfig.from_text(cfg.to_text())
    assert back == cfg
    assert RunConfig.from_text(RunConfig().to_text()) == RunConfig()


def test_flags_override_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("command = reps\nx = 2e5  # scale\nsamples = 5\nworkers = 2\n")
    cfg = cli.config_from_args(["expsum", "--config", str(path), "--samples", "9"])
    assert cfg.command == "expsum" and cfg.x == 2e5 and cfg.samples == 9 and cfg.workers == 2


def test_integer_fields_reject_fractions():
    with pytest.raises(cli.UsageError):
        cli.parse_config_text("n_hi = 1.5e0\n")
    assert cli.parse_config_text("n_hi = 1e5\n") == {"n_hi": 100000}


# --- verify ------------------------------------------------------------------------

def test_verify_small_range(tmp_path):
    assert main(["verify", "--n-lo", "7", "--n-hi", "100001", "--max-gap", "1000", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "verify_summary.json").read_text())
    assert data["complete"] and data["verified"] == data["expected"] == 49998


def test_verify_resume_reproduces_summary(tmp_path):
    args = ["verify", "--n-lo", "7", "--n-hi", "300001", "--max-gap", "1000"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    ck = tmp_path / "ck.json"
    assert main(args + ["--out", str(tmp_path / "b"), "--checkpoint", str(ck)]) == 0
    assert main(args + ["--out", str(tmp_path / "c"), "--checkpoint", str(ck)]) == 0
    a, b, c = ((tmp_path / d / "verify_summary.json").read_bytes() for d in "abc")
    assert a == b == c


def test_ladder_build_then_verify(tmp_path):
    assert main(["ladder-build", "--n-hi", "50001", "--max-gap", "500", "--out", str(tmp_path)]) == 0
    meta = json.loads((tmp_path / "ladder.json").read_text())
    assert meta["limit"] >= 50001 and len(meta["sha256"]) == 64
    ladder_path = str(tmp_path / "ladder.bin")
    assert main(["verify", "--n-hi", "50001", "--ladder", ladder_path, "--certified", "--out", str(tmp_path)]) == 0
    # a ladder shorter than the range is a usage error
    assert main(["verify", "--n-hi", "900001", "--ladder", ladder_path, "--out", str(tmp_path)]) == 64


# --- expsum ------------------------------------------------------------------------

def test_expsum_single_point(tmp_path):
    assert main(["expsum", "--grid", "1", "--x", "1e4", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "expsum.csv")
    assert rows[0] == ["alpha", "re", "im", "abs"] and len(rows) == 2
    alpha, re, im, ab = map(float, rows[1])
    assert alpha == 0.0 and abs(im) <= 1e-9 * abs(re) and re > 0 and ab == pytest.approx(re)


def test_expsum_grid_deterministic(tmp_path):
    args = ["expsum", "--grid", "1000", "--x", "1e5"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "expsum.csv").read_bytes()
    assert a == (tmp_path / "b" / "expsum.csv").read_bytes()
    assert len(a.splitlines()) == 1001


# --- reps --------------------------------------------------------------------------

def test_reps_small_rows(tmp_path):
    assert main(["reps", "--n-lo", "7", "--n-hi", "11", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "reps.csv")
    assert rows[0] == ["n", "unweighted", "weighted", "predicted_main_term", "ratio", "flag"]
    assert [(int(r[0]), int(r[1])) for r in rows[1:]] == [(7, 3), (9, 4), (11, 6)]


def test_reps_even_flagged(tmp_path):
    assert main(["reps", "--n-lo", "8", "--n-hi", "12", "--include-even", "--out", str(tmp_path)]) == 0
    rows = {int(r[0]): r for r in _rows(tmp_path / "reps.csv")[1:]}
    for n in (8, 10, 12):
        assert rows[n][5] == "even" and float(rows[n][3]) == 0.0
    assert rows[9][5] == ""


def test_reps_large_n_ratio(tmp_path):
    n = 10**5 + 1
    assert main(["reps", "--n-lo", str(n), "--n-hi", str(n), "--out", str(tmp_path)]) == 0
    row = _rows(tmp_path / "reps.csv")[1]
    assert int(row[0]) == n
    assert abs(float(row[4]) - 1) <= cli.REPS_RATIO_TOL


# --- bounds, sieve-ratio, report ---------------------------------------------------

def test_bounds_certified(tmp_path):
    assert main(["bounds", "--x", "1e5", "--samples", "40", "--certified", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "survey.json").read_text())
    assert summary["certified"]["rows"] == summary["certified"]["enclosed"] == summary["rows"]
    assert "quantiles" in summary
    survey = _rows(tmp_path / "survey.csv")
    assert survey[0][:8] == ["alpha", "a", "q", "delta", "measured", "bound", "ratio", "branch"]
    assert len(_rows(tmp_path / "survey_certified.csv")) == summary["rows"] + 1
    assert (tmp_path / "major_estimates.csv").exists() and (tmp_path / "sieve_gain.csv").exists()


def test_sieve_ratio(tmp_path):
    assert main(["sieve-ratio", "--x", "1e4", "--s", "4", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "sieve_gain.csv")) == 5


@pytest.mark.parametrize("figures", [True, False])
def test_report(tmp_path, figures):
    args = ["report", "--x", "2e4", "--grid", "64", "--samples", "20", "--s", "3", "--n-lo", "7",
            "--n-hi", "301", "--max-gap", "200", "--out", str(tmp_path)]
    if not figures:
        args.append("--no-figures")
    assert main(args) == 0
    for name in ("weights.csv", "expsum.csv", "survey.csv", "survey.json", "sieve_gain.csv", "reps.csv",
                 "verify_summary.json", "run.cfg"):
        assert (tmp_path / name).stat().st_size > 0
    pngs = sorted(p.name for p in tmp_path.glob("*.png"))
    if figures:
        assert pngs == ["expsum.png", "ladder_gaps.png", "reps.png", "sieve_gain.png", "survey.png"]
        assert (tmp_path / "expsum.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    else:
        assert pngs == []
    saved = RunConfig.from_text((tmp_path / "run.cfg").read_text())
    assert saved.command == "report" and saved.figures is figures
