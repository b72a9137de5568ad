import json
import os
import shutil

import numpy as np
import pytest

from application.experiment import RunReport
from application.pipeline import solve_problem
from domain.errors import ConfigError, DomainError, InconsistencyError
from domain.nodal import NodalSource
from domain.spectrum import solve_level
from infrastructure.cache_repository import CacheRepository
from infrastructure.config_repository import config_from_mapping, load_config
from infrastructure.csv_repository import import_nodal_set, write_report
from utils.keys import nodes_file, report_file, spectrum_file, table_file, timings_file


# -----------------------------
# Config
# -----------------------------
def _field_of(data, **kwargs):
    with pytest.raises(ConfigError) as info:
        config_from_mapping(data, **kwargs)
    return info.value.field


def test_bad_config_names_the_field(config_file):
    with pytest.raises(ConfigError) as info:
        load_config(config_file("bad.toml"))
    assert info.value.field == "run.n_min"
    assert "run.n_min" in str(info.value)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "nope.toml"))


@pytest.mark.parametrize(
    "data, field",
    [
        ({"problem": {"bundled": "trivial"}, "run": {"speed": 1}}, "run.speed"),
        ({"problem": {"bundled": "trivial"}, "run": {"grid_size": 8}}, "run.grid_size"),
        ({"problem": {"bundled": "trivial"}, "run": {"window": 0}}, "run.window"),
        ({"problem": {"bundled": "trivial"}, "run": {"n_min": 8, "n_max": 10, "window": 8}}, "run.n_max"),
        ({"problem": {"bundled": "nothing"}}, "problem.bundled"),
        ({"problem": {"bundled": "trivial"}, "run": {"modes": ["exact"]}}, "run.modes"),
        ({"problem": {"case": "neumann"}}, "problem.case"),
        ({"problem": {"q": {"tan": [[1, 1.0]]}}}, "problem.q"),
        ({"problem": {"h": "inf"}}, "problem.h"),
        ({"run": {}}, "problem"),
        ({"problem": {"bundled": "smooth", "bar": {"bundled": "smooth_bar"}}, "run": {"m_max": 2}}, "run.m_max"),
    ],
)
def test_config_errors(data, field):
    assert _field_of(data) == field


def test_pair_config(config_file):
    config = load_config(config_file("pair.toml"))
    assert config.problem_bar is not None
    assert config.problem.q != config.problem_bar.q
    assert (config.window, config.m_max, config.n_max) == (8, 1, 128)
    assert config.source.endswith("pair.toml")


def test_overrides_win_and_none_is_ignored(config_file):
    config = load_config(config_file("trivial.toml"), {"n_max": 40, "workers": None})
    assert config.n_max == 40
    assert config.workers == 1


def test_cache_dir_defaults_to_the_environment(tmp_path):
    config = config_from_mapping({"problem": {"bundled": "trivial"}})
    assert config.cache_dir == str(tmp_path / "cache")


def test_digest_ignores_output_locations():
    a = config_from_mapping({"problem": {"bundled": "trivial"}}, overrides={"output_dir": "a", "cache_dir": "x"})
    b = config_from_mapping({"problem": {"bundled": "trivial"}}, overrides={"output_dir": "b"})
    assert a.digest() == b.digest()


def test_study_and_window_levels():
    config = config_from_mapping({"problem": {"bundled": "trivial"}, "run": {"n_min": 16, "n_max": 100, "window": 4}})
    assert config.study_levels() == [16, 32, 64, 100]
    assert config.window_levels() == [72, 73, 74, 75, 97, 98, 99, 100]


# -----------------------------
# Cache
# -----------------------------
def test_cache_round_trip_is_exact(tmp_path, smooth):
    repo = CacheRepository(str(tmp_path))
    solutions = [solve_level(smooth, n) for n in (3, 4)]
    repo.store_levels(smooth, solutions)
    found = repo.load_levels(smooth, [3, 4, 5])
    assert sorted(found) == [3, 4]
    for s in solutions:
        assert found[s.entry.n].entry == s.entry
        np.testing.assert_array_equal(found[s.entry.n].nodes, s.nodes)


def test_cache_merges_levels(tmp_path, trivial):
    repo = CacheRepository(str(tmp_path))
    repo.store_levels(trivial, [solve_level(trivial, 1), solve_level(trivial, 2)])
    repo.store_levels(trivial, [solve_level(trivial, 3)])
    assert sorted(repo.load_levels(trivial, [1, 2, 3])) == [1, 2, 3]


def test_cache_refuses_another_problems_file(tmp_path, trivial, constant):
    repo = CacheRepository(str(tmp_path))
    repo.store_levels(trivial, [solve_level(trivial, 1)])
    shutil.copy(tmp_path / spectrum_file(trivial.digest()), tmp_path / spectrum_file(constant.digest()))
    with pytest.raises(InconsistencyError):
        repo.load_levels(constant, [1])


def test_warm_run_equals_cold_run(tmp_path, smooth):
    cold = solve_problem(smooth, [5, 6], cache_dir=str(tmp_path))
    warm = solve_problem(smooth, [5, 6], cache_dir=str(tmp_path))
    assert warm.spectrum == cold.spectrum
    assert warm.nodes == cold.nodes


# -----------------------------
# CSV / JSON
# -----------------------------
def test_import_nodal_set(tmp_path):
    path = tmp_path / "nodes.csv"
    path.write_text("n,j,x,lambda_n\n2,2,2.0,2.1\n2,1,1.0,2.1\n3,1,0.5,3.1\n3,2,1.5,3.1\n3,3,2.5,3.1\n")
    X = import_nodal_set(str(path))
    np.testing.assert_array_equal(X.level(2), [1.0, 2.0])
    assert X.lambda_for(3) == 3.1
    assert X.source is NodalSource.FILE


def test_import_reports_missing_columns(tmp_path):
    path = tmp_path / "nodes.csv"
    path.write_text("n,x\n1,1.0\n")
    with pytest.raises(DomainError, match="j"):
        import_nodal_set(str(path))


def test_import_reads_the_solver_cache_format(tmp_path, trivial):
    solved = solve_problem(trivial, [4, 5, 6], cache_dir=str(tmp_path))
    X = import_nodal_set(str(tmp_path / nodes_file(trivial.digest())))
    assert X.indices == [4, 5, 6]
    for n in (4, 5, 6):
        np.testing.assert_array_equal(X.level(n), solved.nodes.level(n))
        assert X.lambda_for(n) == solved.spectrum.lambda_of(n)
    assert X.source is NodalSource.FILE


def test_import_rejects_an_unknown_case(tmp_path):
    path = tmp_path / "nodes.csv"
    path.write_text("n,j,x,case\n1,1,1.0,III\n")
    with pytest.raises(DomainError, match="III"):
        import_nodal_set(str(path))


def test_import_wraps_unreadable_files(tmp_path):
    with pytest.raises(DomainError, match="cannot read"):
        import_nodal_set(str(tmp_path / "absent.csv"))


def test_write_report_keeps_timings_apart(tmp_path):
    report = RunReport(study="demo", config={"n_max": 8}, config_digest="abc")
    report.add_table("values", [{"n": 1, "v": 0.5}, {"n": 2, "v": float("inf")}])
    report.estimates["d0_hat"] = float("inf")
    report.timings["spectrum"] = 1.5
    written = write_report(report, str(tmp_path))

    assert {os.path.basename(p) for p in written} == {
        table_file("demo", "values"),
        report_file("demo"),
        timings_file("demo"),
    }
    tree = json.loads((tmp_path / report_file("demo")).read_text())
    assert "timings" not in tree
    assert tree["estimates"]["d0_hat"] == "inf"
    assert tree["tables"]["values"][0]["config_digest"] == "abc"
    csv = (tmp_path / table_file("demo", "values")).read_text().splitlines()
    assert csv[0] == "format_version,config_digest,n,v"
