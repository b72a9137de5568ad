from __future__ import annotations

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from application.experiment import ExperimentConfig, RunReport
from application.pipeline import SolvedProblem, certification_summary, solve_problem, stage
from domain.errors import ConfigError
from domain.functions import l1_distance
from domain.metrics import (
    MetricReport,
    MetricWeights,
    build_metric_report,
    limsup_estimate,
    s_n_sequence,
    to_d0,
    to_dsigma,
)
from utils.logging_config import get_logger

logger = get_logger(__name__)

# below this both sides of the identity count as zero
ZERO_DISTANCE = 1e-12


def identity_ratio(distance: float, twice_metric: float) -> Optional[float]:
    """distance / twice_metric; None for 0/0 (identical problems)."""
    if abs(distance) <= ZERO_DISTANCE and abs(twice_metric) <= ZERO_DISTANCE:
        return None
    if abs(twice_metric) <= ZERO_DISTANCE:
        return math.inf
    return distance / twice_metric


def round_trip_error(d0: float) -> float:
    if math.isinf(d0):
        return 0.0
    return abs(to_d0(to_dsigma(d0)) - d0)


def solve_pair(config: ExperimentConfig, report: RunReport, levels: Sequence[int]) -> Tuple[SolvedProblem, SolvedProblem]:
    if config.problem_bar is None:
        raise ConfigError("problem.bar", "this study compares two problems; add a [problem.bar] section")
    with stage("spectrum", report.timings):
        first = solve_problem(config.problem, levels, workers=config.workers, cache_dir=config.cache_dir)
        second = solve_problem(config.problem_bar, levels, workers=config.workers, cache_dir=config.cache_dir)
    report.certification = {"problem": certification_summary(first), "problem_bar": certification_summary(second)}
    return first, second


def _stabilization(per_n: List[Tuple[int, float]], config: ExperimentConfig) -> Dict[str, Any]:
    """limsup over the window ending near 3/4 n_max against the trailing one."""
    early_end = max(config.n_min + config.window - 1, (3 * config.n_max) // 4)
    early = [(n, v) for n, v in per_n if n <= early_end]
    late = limsup_estimate(per_n, config.window).value
    if len(early) < config.window:
        return {"window_late": late}
    first = limsup_estimate(early, config.window).value
    rel = abs(late - first) / abs(late) if late else 0.0
    return {"window_early": first, "window_late": late, "window_relative_change": rel}


def _metric_orders(config: ExperimentConfig, levels: Sequence[int]) -> List[int]:
    # S_{m,n} needs at least m + 3 nodes per level
    top = min(config.m_max, config.smoothness)
    return [m for m in range(1, top + 1) if min(levels) >= m + 3]


def nodal_metric_rows(metrics: MetricReport) -> List[Dict[str, Any]]:
    """One row per level: n, S_n, then S_m_n for every computed order."""
    per_m = {m: dict(series.values) for m, series in sorted(metrics.per_m.items())}
    rows = []
    for n, s in metrics.per_n:
        row: Dict[str, Any] = {"n": n, "S_n": s}
        for m, values in per_m.items():
            row[f"S_{m}_n"] = values.get(n)
        rows.append(row)
    return rows


def run_stability_study(config: ExperimentConfig) -> RunReport:
    """
    Pure orchestration.
    S_n under both weights on the windowed levels, the limsup estimates and
    the Lipschitz identity ||q - qbar||_1 = 2 d0. The nodal_metrics table
    adds S_{m,n} for every order the problems' smoothness allows.
    """
    report = RunReport(study="stability", config=config.as_mapping(), config_digest=config.digest())
    levels = config.window_levels()
    first, second = solve_pair(config, report, levels)
    X, Xbar = first.nodes, second.nodes
    p, pbar = config.problem.p, config.problem_bar.p

    with stage("metrics", report.timings):
        metrics = build_metric_report(
            X,
            Xbar,
            p,
            pbar,
            levels,
            window=config.window,
            weights=MetricWeights.CORRECTED,
            m_values=_metric_orders(config, levels),
        )
        if not metrics.verdict_same_case:
            logger.info("problems belong to different nodal cases; dsigma is 1")
            report.estimates.update(
                {"verdict_same_case": False, "d0_hat": math.inf, "dsigma_hat": 1.0, "d0_hat_paper": math.inf}
            )
            report.add_table("stability", [])
            report.add_table("nodal_metrics", [])
            return report

        corrected = list(metrics.per_n)
        paper = dict(s_n_sequence(X, Xbar, p, pbar, levels, MetricWeights.PAPER))
        distance = l1_distance(config.problem.q, config.problem_bar.q)
        half = 0.5 * distance
        report.add_table(
            "stability",
            [
                {
                    "n": n,
                    "S_n": s,
                    "S_n_paper": paper[n],
                    "ratio": s / half if half > ZERO_DISTANCE else None,
                }
                for n, s in corrected
            ],
        )
        report.add_table("nodal_metrics", nodal_metric_rows(metrics))

        d0 = metrics.d0_hat
        d0_paper = limsup_estimate(list(paper.items()), config.window).value
        report.estimates.update(
            {
                "verdict_same_case": True,
                "window": config.window,
                "d0_hat": d0,
                "dsigma_hat": metrics.dsigma_hat,
                "d0_hat_paper": d0_paper,
                "dsigma_hat_paper": to_dsigma(d0_paper),
                "trend_slope": metrics.trend_slope,
                "q_distance": distance,
                "identity_ratio": identity_ratio(distance, 2.0 * d0),
                "identity_ratio_paper": identity_ratio(distance, 2.0 * d0_paper),
                "round_trip_error": round_trip_error(d0),
            }
        )
        for m, series in sorted(metrics.per_m.items()):
            report.estimates[f"d{m}_hat"] = series.limsup
        report.estimates.update(_stabilization(corrected, config))
        if report.estimates["identity_ratio"] is None:
            report.estimates["identity"] = "exact-zero distance: both sides vanish"
    return report
