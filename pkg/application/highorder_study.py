from __future__ import annotations

from typing import Any, Dict, List

from application.convergence_study import fitted_slope, reconstruction_grid
from application.experiment import ExperimentConfig, RunReport
from application.pipeline import SolvedProblem, stage
from application.stability_study import identity_ratio, solve_pair
from domain.errors import ConfigError
from domain.functions import l1_distance
from domain.metrics import different_cases, limsup_estimate, s_mn_terms, to_dsigma
from domain.reconstruction import ReconstructionMode, reconstruct_q_deriv
from utils.logging_config import get_logger

logger = get_logger(__name__)


def _metric_rows(first: SolvedProblem, second: SolvedProblem, config: ExperimentConfig, m: int, report: RunReport):
    window = config.window_levels()
    X, Xbar = first.nodes.restricted(window), second.nodes.restricted(window)
    p, pbar = config.problem.p, config.problem_bar.p
    rows: List[Dict[str, Any]] = []
    for n in X.indices:
        lam = first.spectrum.lambda_of(n)
        plain = s_mn_terms(X, Xbar, p, pbar, m, n, lam, corrected_weights=False)
        weighted = s_mn_terms(X, Xbar, p, pbar, m, n, lam, corrected_weights=True)
        rows.append(
            {
                "m": m,
                "n": n,
                "lambda_n": lam,
                "S_mn": sum(weighted),
                "S_mn_paper": sum(plain),
                "first_term": weighted[0],
                "first_term_paper": plain[0],
                "middle_term": weighted[1],
                "last_term": weighted[2],
            }
        )

    dm = limsup_estimate([(r["n"], r["S_mn"]) for r in rows], config.window).value
    dm_paper = limsup_estimate([(r["n"], r["S_mn_paper"]) for r in rows], config.window).value
    distance = l1_distance(config.problem.q, config.problem_bar.q, m)
    report.estimates[f"m{m}"] = {
        "dm_hat": dm,
        "dsigma_m_hat": to_dsigma(dm),
        "dm_hat_paper": dm_paper,
        "dsigma_m_hat_paper": to_dsigma(dm_paper),
        "q_deriv_distance": distance,
        "identity_ratio": identity_ratio(distance, 2.0 * dm),
        "identity_ratio_paper": identity_ratio(distance, 2.0 * dm_paper),
    }
    return rows


def _derivative_rows(solved: SolvedProblem, config: ExperimentConfig, m: int, report: RunReport):
    problem = solved.problem
    grid = reconstruction_grid(config.grid_size)
    modes = [ReconstructionMode(mode) for mode in config.modes if mode != ReconstructionMode.BARE_N.value]
    rows: List[Dict[str, Any]] = []
    for mode in modes:
        errors = []
        for n in config.study_levels():
            lam = solved.spectrum.lambda_of(n)
            result = reconstruct_q_deriv(solved.nodes, n, lam, problem.p, m, grid, mode).with_truth(problem.q)
            errors.append(result.l1_error_vs_truth)
            rows.append({"m": m, "n": n, "mode": mode.value, "l1_error": result.l1_error_vs_truth})
        report.estimates[f"m{m}"][f"deriv_slope_{mode.value}"] = fitted_slope(config.study_levels(), errors)
    return rows


def run_highorder_study(config: ExperimentConfig) -> RunReport:
    """
    Pure orchestration.
    For m = 1..m_max: S_{m,n} under both weights with its three terms, d_m and
    the identity ||q^(m) - qbar^(m)||_1 = 2 d_m, plus the convergence of the
    derivative reconstruction for the first problem.
    """
    report = RunReport(study="high_order", config=config.as_mapping(), config_digest=config.digest())
    levels = sorted(set(config.window_levels()) | set(config.study_levels()))
    first, second = solve_pair(config, report, levels)

    if different_cases(first.nodes, second.nodes):
        logger.info("problems belong to different nodal cases; d_m is not defined between them")
        report.estimates["verdict_same_case"] = False
        report.add_table("s_mn", [])
        return report
    report.estimates["verdict_same_case"] = True
    if config.m_max > config.smoothness:
        raise ConfigError("run.m_max", f"m_max={config.m_max} exceeds the smoothness order N={config.smoothness}")

    metric_rows: List[Dict[str, Any]] = []
    derivative_rows: List[Dict[str, Any]] = []
    for m in range(1, config.m_max + 1):
        with stage(f"s_mn[m={m}]", report.timings):
            metric_rows.extend(_metric_rows(first, second, config, m, report))
        with stage(f"derivatives[m={m}]", report.timings):
            derivative_rows.extend(_derivative_rows(first, config, m, report))
    report.add_table("s_mn", metric_rows)
    report.add_table("derivative_reconstruction", derivative_rows)
    return report
