from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence

from application.experiment import ExperimentConfig, RunReport
from domain.asymptotics import compute_c0_c1, lambda_asymptotic, nodes_asymptotic
from domain.errors import PencilLabError
from domain.nodal import NodalCase, NodalSet, NodalSource
from domain.problem import BoundaryCase, PencilProblem
from domain.spectrum import LevelSolution, Spectrum, solve_level, spectrum_from_levels
from infrastructure.cache_repository import CacheRepository
from utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SolvedProblem:
    problem: PencilProblem
    spectrum: Spectrum
    nodes: NodalSet


@contextmanager
def stage(name: str, timings: Dict[str, float]) -> Iterator[None]:
    """Wall-clock a stage and prefix its failures with the stage name, keeping their class."""
    start = time.perf_counter()
    logger.info(f"stage {name}: start")
    try:
        yield
    except PencilLabError as exc:
        exc.args = (f"[{name}] {exc}",) + tuple(exc.args[1:])
        raise
    finally:
        elapsed = time.perf_counter() - start
        timings[name] = timings.get(name, 0.0) + elapsed
        logger.info(f"stage {name}: {elapsed:.2f}s")


def _solve_missing(problem: PencilProblem, indices: List[int], workers: int) -> List[LevelSolution]:
    if not indices:
        return []
    if workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(solve_level, [problem] * len(indices), indices))
    return [solve_level(problem, n) for n in indices]


def case_tag_for(problem: PencilProblem) -> NodalCase:
    return NodalCase.CASE_II if problem.case is BoundaryCase.DIRICHLET_INIT else NodalCase.CASE_I


def solve_problem(
    problem: PencilProblem,
    indices: Sequence[int],
    *,
    workers: int = 1,
    cache_dir: Optional[str] = None,
) -> SolvedProblem:
    """
    Certified eigenvalues and nodes for the requested indices.
    Cached levels are reused; the rest fan out to the worker pool and are
    merged by index, so results never depend on completion order.
    """
    wanted = sorted(set(int(n) for n in indices))
    cache = CacheRepository(cache_dir) if cache_dir else None
    found: Dict[int, LevelSolution] = cache.load_levels(problem, wanted) if cache else {}
    missing = [n for n in wanted if n not in found]
    if missing:
        logger.info(f"problem {problem.digest()}: solving {len(missing)} level(s), {len(found)} from cache")
        fresh = _solve_missing(problem, missing, workers)
        if cache:
            cache.store_levels(problem, fresh)
        found.update({s.entry.n: s for s in fresh})

    solutions = [found[n] for n in wanted]
    spectrum = spectrum_from_levels(problem, solutions)
    nodes = NodalSet(
        levels={s.entry.n: s.nodes for s in solutions},
        case_tag=case_tag_for(problem),
        source=NodalSource.SOLVER,
        lambdas={s.entry.n: s.entry.lam for s in solutions},
    )
    return SolvedProblem(problem=problem, spectrum=spectrum, nodes=nodes)


def certification_summary(solved: SolvedProblem) -> Dict[str, object]:
    entries = solved.spectrum.entries
    return {
        "problem_digest": solved.spectrum.problem_digest,
        "levels": len(entries),
        "max_residual": max((e.residual for e in entries), default=0.0),
        "node_counts_match": all(e.node_count == e.n for e in entries),
    }


# -----------------------------
# forward / nodes reports
# -----------------------------
def run_forward(config: ExperimentConfig) -> RunReport:
    report = RunReport(study="forward", config=config.as_mapping(), config_digest=config.digest())
    levels = list(range(config.n_min, config.n_max + 1))
    with stage("spectrum", report.timings):
        solved = solve_problem(config.problem, levels, workers=config.workers, cache_dir=config.cache_dir)
    asym = compute_c0_c1(config.problem)
    rows = []
    for e in solved.spectrum.entries:
        seed = lambda_asymptotic(e.n, asym)
        rows.append(
            {
                "n": e.n,
                "lambda_n": e.lam,
                "residual": e.residual,
                "node_count": e.node_count,
                "lambda_asymptotic": seed,
                "remainder": e.n * abs(e.lam - seed),
            }
        )
    report.add_table("spectrum", rows)
    report.estimates = {"c0": asym.c0, "c1": asym.c1}
    report.certification = certification_summary(solved)
    return report


def run_nodes(config: ExperimentConfig) -> RunReport:
    report = RunReport(study="nodes", config=config.as_mapping(), config_digest=config.digest())
    levels = config.study_levels()
    with stage("spectrum", report.timings):
        solved = solve_problem(config.problem, levels, workers=config.workers, cache_dir=config.cache_dir)

    rows, deviations = [], []
    with stage("asymptotics", report.timings):
        for n in solved.nodes.indices:
            lam = solved.spectrum.lambda_of(n)
            approx, _ = nodes_asymptotic(config.problem, lam, n)
            nodes = solved.nodes.level(n)
            k = min(approx.size, nodes.size)
            worst = float(max(abs(approx[:k] - nodes[:k]))) if k else 0.0
            deviations.append({"n": n, "lambda_n": lam, "max_asymptotic_deviation": worst, "scaled_n3": worst * n**3})
            for j, x in enumerate(nodes, start=1):
                rows.append(
                    {
                        "n": n,
                        "j": j,
                        "x": float(x),
                        "lambda_n": lam,
                        "asymptotic": float(approx[j - 1]) if j <= approx.size else None,
                    }
                )
    report.add_table("nodes", rows)
    report.add_table("asymptotic_deviation", deviations)
    report.certification = certification_summary(solved)
    return report
