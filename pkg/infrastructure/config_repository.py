"""
TOML experiment configs.

    [problem]                       # or: bundled = "smooth"
    h = 0.0
    H = 0.0
    case = "robin"                  # "robin" | "dirichlet"
    h_convention = "boundary"       # "boundary" | "solution"
    N = 1
    [problem.p]
    sin = [[1, 0.2]]
    [problem.q]
    sin = [[3, 1.0]]
    cos = [[1, 0.2]]

    [problem.bar]                   # optional second problem, same shape
    ...

    [run]
    n_min = 16
    n_max = 128
    ...
"""
from __future__ import annotations

import math

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, Mapping, Optional

from application.container import get_bundled_problem_mapping
from application.experiment import ExperimentConfig
from config.run_defaults import (
    DEFAULT_GRID_SIZE,
    DEFAULT_H_INDEX,
    DEFAULT_M_MAX,
    DEFAULT_N_MAX,
    DEFAULT_N_MIN,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_WORKERS,
)
from config.tolerances import LIMSUP_WINDOW
from domain.errors import ConfigError, DomainError
from domain.functions import RealFunction
from domain.problem import BoundaryCase, HConvention, PencilProblem
from domain.reconstruction import ReconstructionMode
from infrastructure.cache_repository import default_cache_dir

MIN_GRID_SIZE = 64
_PROBLEM_KEYS = {"bundled", "h", "H", "case", "h_convention", "N", "p", "q", "bar", "extra"}
_RUN_KEYS = {
    "n_min",
    "n_max",
    "levels",
    "grid_size",
    "modes",
    "window",
    "workers",
    "m_max",
    "output_dir",
    "cache_dir",
    "h_index",
}


def _finite(section: str, key: str, value: Any) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}", f"expected a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{section}.{key}", "must be finite")
    return v


def _int(section: str, key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{section}.{key}", f"expected an integer, got {value!r}")
    return value


def problem_from_mapping(data: Mapping[str, Any], section: str = "problem") -> PencilProblem:
    unknown = set(data) - _PROBLEM_KEYS
    if unknown:
        raise ConfigError(f"{section}.{sorted(unknown)[0]}", "unknown key")
    if "bundled" in data:
        base = dict(get_bundled_problem_mapping(str(data["bundled"]), field=f"{section}.bundled"))
        base.update({k: v for k, v in data.items() if k not in {"bundled", "bar", "extra"}})
        data = base

    try:
        p = RealFunction.from_mapping(dict(data.get("p", {})))
    except DomainError as exc:
        raise ConfigError(f"{section}.p", str(exc)) from None
    try:
        q = RealFunction.from_mapping(dict(data.get("q", {})))
    except DomainError as exc:
        raise ConfigError(f"{section}.q", str(exc)) from None

    try:
        case = BoundaryCase(data.get("case", BoundaryCase.ROBIN_INIT.value))
    except ValueError:
        raise ConfigError(f"{section}.case", f"expected 'robin' or 'dirichlet', got {data.get('case')!r}") from None
    try:
        convention = HConvention(data.get("h_convention", HConvention.BOUNDARY.value))
    except ValueError:
        raise ConfigError(
            f"{section}.h_convention", f"expected 'boundary' or 'solution', got {data.get('h_convention')!r}"
        ) from None

    N = _int(section, "N", data.get("N", 0))
    if N < 0:
        raise ConfigError(f"{section}.N", "must be >= 0")
    return PencilProblem(
        p=p,
        q=q,
        h=_finite(section, "h", data.get("h", 0.0)),
        H=_finite(section, "H", data.get("H", 0.0)),
        case=case,
        N=N,
        h_convention=convention,
    )


def config_from_mapping(
    data: Mapping[str, Any],
    *,
    source: str = "",
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    unknown = set(data) - {"problem", "run"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    if "problem" not in data:
        raise ConfigError("problem", "section is required")

    prob = data["problem"]
    problem = problem_from_mapping(prob)
    bar = problem_from_mapping(prob["bar"], "problem.bar") if "bar" in prob else None
    extra = tuple(problem_from_mapping(e, f"problem.extra[{i}]") for i, e in enumerate(prob.get("extra", [])))

    run = dict(data.get("run", {}))
    run.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"run.{sorted(unknown)[0]}", "unknown key")

    n_min = _int("run", "n_min", run.get("n_min", DEFAULT_N_MIN))
    n_max = _int("run", "n_max", run.get("n_max", DEFAULT_N_MAX))
    window = _int("run", "window", run.get("window", LIMSUP_WINDOW))
    grid_size = _int("run", "grid_size", run.get("grid_size", DEFAULT_GRID_SIZE))
    workers = _int("run", "workers", run.get("workers", DEFAULT_WORKERS))
    m_max = _int("run", "m_max", run.get("m_max", DEFAULT_M_MAX))
    h_index = _int("run", "h_index", run.get("h_index", DEFAULT_H_INDEX))
    levels = tuple(_int("run", "levels", v) for v in run.get("levels", []))

    if n_min < 1:
        raise ConfigError("run.n_min", "must be >= 1")
    if n_min > n_max:
        raise ConfigError("run.n_min", f"n_min={n_min} exceeds n_max={n_max}")
    if window < 1:
        raise ConfigError("run.window", "must be >= 1")
    if n_max < n_min + window:
        raise ConfigError("run.n_max", f"n_max={n_max} must be at least n_min + window = {n_min + window}")
    if grid_size < MIN_GRID_SIZE:
        raise ConfigError("run.grid_size", f"must be >= {MIN_GRID_SIZE}, got {grid_size}")
    if workers < 1:
        raise ConfigError("run.workers", "must be >= 1")
    if m_max < 1:
        raise ConfigError("run.m_max", "must be >= 1")
    smoothness = min(p.N for p in (problem, bar) if p is not None)
    if "m_max" in run and m_max > smoothness:
        raise ConfigError("run.m_max", f"m_max={m_max} exceeds the smoothness order N={smoothness} of the problem")
    if h_index < 1:
        raise ConfigError("run.h_index", "must be >= 1")
    if any(n < 1 for n in levels):
        raise ConfigError("run.levels", "levels must be >= 1")

    modes = tuple(run.get("modes", ["paper", "corrected"]))
    for mode in modes:
        try:
            ReconstructionMode(mode)
        except ValueError:
            raise ConfigError("run.modes", f"unknown reconstruction mode {mode!r}") from None

    cache_dir = run.get("cache_dir", default_cache_dir())
    return ExperimentConfig(
        problem=problem,
        problem_bar=bar,
        extra=extra,
        n_min=n_min,
        n_max=n_max,
        levels=levels,
        grid_size=grid_size,
        modes=modes,
        window=window,
        workers=workers,
        m_max=m_max,
        h_index=h_index,
        output_dir=str(run.get("output_dir", DEFAULT_OUTPUT_DIR)),
        cache_dir=str(cache_dir) if cache_dir else None,
        source=source,
    )


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    return config_from_mapping(data, source=path, overrides=overrides)
