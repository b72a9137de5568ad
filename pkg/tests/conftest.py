import os

import pytest

from application.container import get_bundled_problem
from application.pipeline import solve_problem
from config.run_defaults import CACHE_DIR_ENV

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    # configs without cache_dir fall back to the environment
    monkeypatch.setenv(CACHE_DIR_ENV, str(tmp_path / "cache"))


# -----------------------------
# Bundled problems
# -----------------------------
@pytest.fixture(scope="session")
def trivial():
    return get_bundled_problem("trivial")


@pytest.fixture(scope="session")
def constant():
    return get_bundled_problem("constant")


@pytest.fixture(scope="session")
def smooth():
    return get_bundled_problem("smooth")


@pytest.fixture(scope="session")
def dirichlet_trivial():
    return get_bundled_problem("dirichlet_trivial")


# -----------------------------
# Solved levels (no cache)
# -----------------------------
@pytest.fixture(scope="session")
def trivial_solved(trivial):
    return solve_problem(trivial, range(1, 21))


@pytest.fixture(scope="session")
def constant_solved(constant):
    return solve_problem(constant, [5, 16, 32, 40, 64])


@pytest.fixture(scope="session")
def smooth_solved(smooth):
    return solve_problem(smooth, [10, 15, 16, 20, 25, 30, 35, 40, 64])


@pytest.fixture(scope="session")
def config_file():
    return config_path
