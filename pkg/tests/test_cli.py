"""End-to-end checks of the command-line interface.

Covers the documented exit codes (0 success, 1 usage/parse error,
2 numerical failure, 3 verification failure), byte-stable CSV output,
and agreement of each exporting subcommand with the library it fronts.
"""

import csv
import math
import subprocess
import sys

import numpy as np

from oscdeform import catalog, cli, verify
from oscdeform.apps import rcd_travelling_wave


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader]
    return header, np.array(rows)


def test_solve_rerun_is_byte_identical(tmp_path):
    # the span crosses two cotangent poles, which exercises the spectral
    # transit path where run-to-run drift would show up first
    args = ["solve", "--f", "0.3*sin(t + 0.3)", "--g", "0.2*sin(t + 0.3)^2",
            "--omega", "1", "--alpha", "0.3", "--t0", "0.5",
            "--t1", "6.783185307179586", "--samples", "150",
            "--x0", "0.4", "--v0", "0.9"]
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "oscdeform"] + args + ["--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_solve_harmonic_from_pole_matches_sine(tmp_path):
    out = tmp_path / "harmonic.csv"
    code = cli.main(["solve", "--f", "0", "--g", "0", "--omega", "1",
                     "--t0", "0", "--t1", "6.283185307179586",
                     "--samples", "100", "--x0", "0", "--v0", "1",
                     "--out", str(out)])
    assert code == 0
    header, rows = read_rows(out)
    assert header == ["t", "x", "v"]
    assert rows.shape == (100, 3)
    assert np.max(np.abs(rows[:, 1] - np.sin(rows[:, 0]))) < 1e-8
    assert np.max(np.abs(rows[:, 2] - np.cos(rows[:, 0]))) < 1e-8


def test_solve_reproduces_case3_closed_form(tmp_path):
    beta, gamma, delta, n, amp = 1.0, 0.3, 0.5, 3, 1.3
    sol = catalog.case3(beta, gamma, delta, n, amp, 1.0, 0.3)
    t0, t1 = 0.5, 2.9
    out = tmp_path / "case3.csv"
    # "=" form keeps argparse from reading the leading minus as a flag
    code = cli.main(["solve",
                     "--f=%r*x + %r*x^%d" % (-gamma, delta, n),
                     "--g=%r*x" % (beta - 1.0),
                     "--omega", "1", "--alpha", "0.3",
                     "--t0", repr(t0), "--t1", repr(t1), "--samples", "40",
                     "--x0", repr(float(sol(t0))),
                     "--v0", repr(float(sol.v_evaluator(t0))),
                     "--out", str(out)])
    assert code == 0
    _, rows = read_rows(out)
    exact = np.array([sol(t) for t in rows[:, 0]])
    assert np.max(np.abs(rows[:, 1] - exact)) < 1e-6


def test_solve_methods_agree(tmp_path):
    # alpha is left to be fitted from (t0, x0, v0) so both methods
    # integrate the same initial-value problem; the span stops before the
    # crossing x + g = 0, where the second-order form turns singular
    common = ["--f", "0.4*sin(t + 0.3)", "--g", "0", "--omega", "1",
              "--t0", "0.5", "--t1", "2.2",
              "--samples", "30", "--x0", "0.8", "--v0", "0.1"]
    paths = []
    for method in ("first-integral", "second-order"):
        out = tmp_path / (method + ".csv")
        assert cli.main(["solve"] + common
                        + ["--method", method, "--out", str(out)]) == 0
        paths.append(out)
    _, a = read_rows(paths[0])
    _, b = read_rows(paths[1])
    assert np.max(np.abs(a[:, 1] - b[:, 1])) < 1e-7


def test_rcd_profile_matches_library(tmp_path):
    out = tmp_path / "wave.csv"
    code = cli.main(["rcd", "--param", "beta=2", "--param", "gamma=0.3",
                     "--param", "delta=0.6", "--param", "A=4",
                     "--omega", "1", "--t0", "0.1", "--t1", "2.0",
                     "--samples", "12", "--out", str(out)])
    assert code == 0
    header, rows = read_rows(out)
    assert header == ["xi", "u"]
    wave = rcd_travelling_wave({"beta": 2, "gamma": 0.3, "delta": 0.6,
                                "A": 4, "omega": 1, "alpha": 0})
    for xi, u in rows:
        assert abs(u - wave(xi)) <= 1e-14 * (1.0 + abs(u))


def test_beam_modes_agree(tmp_path):
    # approx mode is only admissible on the resonant line beta = 2*alpha/3
    common = ["--alpha-coef", "0.04",
              "--beta-coef", repr(2.0 * 0.04 / 3.0),
              "--omega", "1", "--x0", "0.05", "--v0", "0",
              "--t0", "0", "--t1", "6.283185307179586", "--samples", "40"]
    results = {}
    for mode in ("approx", "direct"):
        out = tmp_path / (mode + ".csv")
        assert cli.main(["beam"] + common
                        + ["--mode", mode, "--out", str(out)]) == 0
        _, results[mode] = read_rows(out)
    diff = np.max(np.abs(results["approx"][:, 1] - results["direct"][:, 1]))
    assert diff < 1e-3


def test_catalog_csv_matches_evaluator(tmp_path):
    out = tmp_path / "case2.csv"
    code = cli.main(["catalog", "--case", "case2", "--param", "g0=0.3",
                     "--param", "n=3", "--param", "A=1.1",
                     "--omega", "1", "--alpha", "0.3",
                     "--t0", "0.2", "--t1", "5.0", "--samples", "25",
                     "--out", str(out)])
    assert code == 0
    _, rows = read_rows(out)
    sol = catalog.case2(0.3, 3, 1.1, 1.0, 0.3)
    for t, x, v in rows:
        assert abs(x - sol(t)) <= 1e-14 * (1.0 + abs(x))
        assert abs(v - sol.v_evaluator(t)) <= 1e-12 * (1.0 + abs(v))


def test_derive_prints_ode_and_first_integral(capsys):
    code = cli.main(["derive", "--f", "0", "--g", "b*x^2", "--omega", "1",
                     "--param", "b=0.7"])
    assert code == 0
    text = capsys.readouterr().out
    assert "generated ODE:" in text
    assert "* xdd +" in text
    assert "first integral:" in text
    assert "cot(" in text


def test_derive_time_varying_omega(capsys):
    code = cli.main(["derive", "--f", "0.1*sin(t)", "--g", "0",
                     "--omega", "1 + 0.5*cos(t)"])
    assert code == 0
    text = capsys.readouterr().out
    assert "Phi(t)" in text
    assert "omega(t) = 1 + 0.5*cos(t)" in text


def test_verify_suite_reports_pass(capsys):
    code = cli.main(["verify", "--suite", "hyp2f1"])
    assert code == 0
    text = capsys.readouterr().out
    assert "3/3 checks passed" in text
    assert "FAIL" not in text


def test_exit_one_on_parse_error(capsys):
    assert cli.main(["solve", "--f", "0.3*sin(t", "--g", "0"]) == 1
    assert "parse error" in capsys.readouterr().err


def test_exit_one_on_usage_errors(capsys):
    assert cli.main(["verify", "--suite", "nope"]) == 1
    assert cli.main(["solve", "--samples", "1"]) == 1
    assert cli.main(["rcd", "--param", "beta=1"]) == 1  # missing gamma etc.
    assert cli.main(["catalog", "--case", "case2"]) == 1  # missing params
    assert cli.main(["beam", "--mode", "approx"]) == 1  # missing coefs
    assert cli.main(["frobnicate"]) == 1
    err = capsys.readouterr().err
    assert "unknown suite" in err


def test_exit_two_on_numerical_failure(capsys):
    # constant f does not vanish at the cotangent pole, so the crossing
    # velocity diverges and the driver refuses to continue
    code = cli.main(["solve", "--f", "1", "--g", "0", "--omega", "1",
                     "--alpha", "0", "--t0", "0.5", "--t1", "6.0",
                     "--x0", "0.4", "--v0", "0.2"])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_exit_three_on_verification_failure(monkeypatch, capsys):
    def failing_suite():
        return [verify.Check("stub/always-fails", 1.0, 1e-6, False)]

    monkeypatch.setitem(verify.SUITES, "stub", failing_suite)
    code = cli.main(["verify", "--suite", "stub"])
    assert code == 3
    assert "0/1 checks passed" in capsys.readouterr().out


def test_config_file_supplies_defaults_flags_win(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample run\n"
                   "f = 0.4*sin(t + 0.3)\n"
                   "g = 0\n"
                   "omega = 1\n"
                   "alpha = 0.3\n"
                   "t0 = 0.5\n"
                   "t1 = 2.5\n"
                   "samples = 3\n"
                   "x0 = 1.2\n")
    out1 = tmp_path / "from_config.csv"
    assert cli.main(["solve", "--config", str(cfg),
                     "--out", str(out1)]) == 0
    _, rows = read_rows(out1)
    assert rows.shape == (3, 3)
    assert math.isclose(rows[0, 0], 0.5) and math.isclose(rows[-1, 0], 2.5)

    out2 = tmp_path / "flag_override.csv"
    assert cli.main(["solve", "--config", str(cfg), "--samples", "7",
                     "--out", str(out2)]) == 0
    _, rows = read_rows(out2)
    assert rows.shape == (7, 3)

    missing = cli.main(["solve", "--config", str(tmp_path / "absent.cfg")])
    assert missing == 1
    assert "cannot read config file" in capsys.readouterr().err
