import os

import pytest

from application.experiment import RunReport
from domain.errors import SolverNonconvergenceError
from ui.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, EXIT_SOLVER, build_parser, cli_dispatch
from ui.summary import render_summary


def test_bad_config_exits_with_2(config_file, capsys):
    assert cli_dispatch(["forward", "--config", config_file("bad.toml")]) == EXIT_CONFIG
    assert "run.n_min" in capsys.readouterr().err


def test_unknown_flag_exits_with_2():
    assert cli_dispatch(["forward", "--speed", "11"]) == EXIT_CONFIG


def test_missing_config_exits_with_2(capsys):
    assert cli_dispatch(["stability"]) == EXIT_CONFIG
    assert "--config" in capsys.readouterr().err


def test_forward_writes_its_files(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli_dispatch(["forward", "--config", config_file("trivial.toml"), "--out", str(out), "--nmax", "20"]) == EXIT_OK
    names = set(os.listdir(out))
    assert {"forward_spectrum.csv", "forward_report.json", "forward_timings.json", "forward_summary.txt"} <= names
    assert "pencil-lab forward" in capsys.readouterr().out


def test_selfcheck_target_with_discrepancy_table(config_file, tmp_path):
    out = tmp_path / "out"
    argv = ["selfcheck", "--target", "trivial_exactness", "--config", config_file("trivial.toml"), "--out", str(out)]
    assert cli_dispatch(argv) == EXIT_OK
    assert (out / "selfcheck_discrepancy.csv").exists()
    assert (out / "selfcheck_checks.csv").exists()


def test_solver_failure_exits_with_3(config_file, tmp_path, monkeypatch, capsys):
    def fail(problem, n):
        raise SolverNonconvergenceError(f"n={n}: no bracket")

    monkeypatch.setattr("application.pipeline.solve_level", fail)
    argv = ["forward", "--config", config_file("trivial.toml"), "--out", str(tmp_path), "--workers", "1"]
    assert cli_dispatch(argv) == EXIT_SOLVER
    assert "no bracket" in capsys.readouterr().err


def test_unwritable_output_exits_with_2(config_file, tmp_path, capsys):
    blocker = tmp_path / "taken"
    blocker.write_text("not a directory")
    argv = ["forward", "--config", config_file("trivial.toml"), "--out", str(blocker / "out"), "--nmax", "10"]
    assert cli_dispatch(argv) == EXIT_CONFIG
    assert "--out" in capsys.readouterr().err


def test_bad_nodal_file_exits_with_1(config_file, tmp_path, capsys):
    nodes = tmp_path / "nodes.csv"
    nodes.write_text("n,j,x,case\n1,1,1.0,III\n")
    argv = ["reconstruct", "--config", config_file("trivial.toml"), "--nodes", str(nodes), "--out", str(tmp_path / "out")]
    assert cli_dispatch(argv) == EXIT_FAILED
    assert "unknown nodal case" in capsys.readouterr().err


def test_mode_flag_maps_to_modes():
    args = build_parser().parse_args(["reconstruct", "--mode", "both", "--order", "1", "-vv"])
    assert (args.mode, args.order, args.verbose) == ("both", 1, 2)


def test_summary_lists_failed_checks():
    report = RunReport(study="selfcheck", config={}, config_digest="abc")
    report.add_table(
        "checks",
        [
            {"target": "a", "check": "x <= 1", "value": 0.5, "threshold": 1.0, "passed": True},
            {"target": "b", "check": "y <= 1", "value": 2.0, "threshold": 1.0, "passed": False},
        ],
    )
    report.estimates.update({"passed": False, "d0_hat": float("inf"), "m1": {"dm_hat": None}})
    text = render_summary(report)
    assert "checks: 1/2 passed" in text
    assert "FAILED b: y <= 1 = 2 (threshold 1)" in text
    assert "d0_hat: inf" in text
    assert "dm_hat: n/a" in text


@pytest.mark.slow
def test_stability_command(config_file, tmp_path):
    import pandas as pd

    out = tmp_path / "out"
    argv = ["stability", "--config", config_file("pair.toml"), "--out", str(out), "--nmax", "128"]
    assert cli_dispatch(argv) in (EXIT_OK, EXIT_FAILED)
    table = pd.read_csv(out / "stability_stability.csv")
    assert {"n", "S_n", "ratio"} <= set(table.columns)
    metrics = pd.read_csv(out / "stability_nodal_metrics.csv")
    assert {"n", "S_n", "S_1_n"} <= set(metrics.columns)
