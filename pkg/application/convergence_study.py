from __future__ import annotations

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from application.experiment import ExperimentConfig, RunReport
from application.pipeline import SolvedProblem, certification_summary, solve_problem, stage
from config.run_defaults import PROBE_POINTS
from domain.asymptotics import compute_c0_c1, eigenvalue_remainders
from domain.errors import CaseMismatchError, ConfigError
from domain.functions import PI
from domain.nodal import NodalCase, NodalSet
from domain.reconstruction import (
    HRecoveryMode,
    ReconstructionMode,
    ReconstructionResult,
    calibration_factor,
    h_estimates,
    local_average_check,
    reconstruct_q,
    reconstruct_q_deriv,
    richardson,
)
from utils.logging_config import get_logger

logger = get_logger(__name__)

# a paper-mode error this many times the corrected one is reported
DISCREPANCY_FACTOR = 2.0
_ZERO_ERROR = 1e-14


def reconstruction_grid(size: int):
    """Uniform grid on [0, pi] including both endpoints."""
    return np.linspace(0.0, PI, size)


def fitted_slope(ns: Sequence[int], errors: Sequence[float]) -> Optional[float]:
    """Empirical order p in error ~ C / n^p; None when errors sit at round-off."""
    if len(ns) < 2 or min(errors) <= _ZERO_ERROR:
        return None
    return float(-np.polyfit(np.log(np.asarray(ns, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)[0])


def fitted_constant(ns: Sequence[int], errors: Sequence[float]) -> float:
    """Smallest C with error <= C / n on every level."""
    return float(max(n * e for n, e in zip(ns, errors)))


def _reconstruction_rows(solved: SolvedProblem, config: ExperimentConfig, report: RunReport) -> List[Dict[str, Any]]:
    problem = solved.problem
    grid = reconstruction_grid(config.grid_size)
    probes = np.asarray(PROBE_POINTS)
    rows: List[Dict[str, Any]] = []
    errors: Dict[str, Dict[int, float]] = {m: {} for m in config.modes}

    for n in solved.nodes.indices:
        lam = solved.spectrum.lambda_of(n)
        for mode in config.modes:
            result = reconstruct_q(solved.nodes, n, lam, problem.p, grid, mode).with_truth(problem.q)
            at_probes = reconstruct_q(solved.nodes, n, lam, problem.p, probes, mode)
            row: Dict[str, Any] = {
                "n": n,
                "lambda_n": lam,
                "mode": mode,
                "l1_error": result.l1_error_vs_truth,
                "flagged_points": int(result.flagged.sum()),
            }
            for x, v in zip(probes, at_probes.values):
                row[f"err_x{x:g}"] = abs(float(v) - float(problem.q(x)))
            rows.append(row)
            errors[mode][n] = float(result.l1_error_vs_truth)

    ns = solved.nodes.indices
    for mode, by_n in errors.items():
        series = [by_n[n] for n in ns]
        report.estimates[f"slope_{mode}"] = fitted_slope(ns, series)
        report.estimates[f"c_fit_{mode}"] = fitted_constant(ns, series)
        report.estimates[f"l1_error_{mode}_at_{ns[-1]}"] = series[-1]

    if "paper" in errors and "corrected" in errors:
        for n in ns:
            paper, corrected = errors["paper"][n], errors["corrected"][n]
            if paper > DISCREPANCY_FACTOR * max(corrected, _ZERO_ERROR):
                msg = f"n={n}: paper-mode L1 error {paper:.4g} vs corrected {corrected:.4g}"
                report.discrepancies.append(msg)
                logger.warning(msg)
    return rows


def _h_rows(solved: SolvedProblem, config: ExperimentConfig, report: RunReport, q_est) -> List[Dict[str, Any]]:
    if solved.nodes.case_tag is NodalCase.CASE_II:
        report.estimates["h_recovery"] = "not applicable to Case II nodal sets"
        return []
    ns = solved.nodes.indices
    if len(ns) < 3:
        report.estimates["h_recovery"] = "needs three levels"
        return []
    j = config.h_index
    kappa = calibration_factor(config.problem.h_convention, j, ns)
    paper = dict(h_estimates(solved.nodes, solved.spectrum, j, ns, q_est, config.problem.p, HRecoveryMode.PAPER))
    calibrated = dict(
        h_estimates(solved.nodes, solved.spectrum, j, ns, q_est, config.problem.p, HRecoveryMode.CALIBRATED, kappa)
    )
    report.estimates.update(
        {
            "h_true": config.problem.h,
            "h_paper": richardson(list(paper.items())),
            "h_calibrated": richardson(list(calibrated.items())),
            "kappa": kappa,
        }
    )
    return [{"n": n, "h_paper": paper[n], "h_calibrated": calibrated[n]} for n in ns]


def _q_estimate(solved: SolvedProblem, config: ExperimentConfig) -> ReconstructionResult:
    n = solved.nodes.indices[-1]
    return reconstruct_q(
        solved.nodes,
        n,
        solved.spectrum.lambda_of(n),
        solved.problem.p,
        reconstruction_grid(config.grid_size),
        ReconstructionMode.CORRECTED,
    )


def run_convergence_study(config: ExperimentConfig) -> RunReport:
    """
    Pure orchestration.
    Tables:
      - reconstruction: n x mode -> L1 error and pointwise errors at the probe points
      - h_recovery: per-level h estimates in both modes
      - local_average: lambda_n * int q over the interval around x = 1
      - asymptotics: n * |lambda_n - n - c0 - c1/n|
    """
    report = RunReport(study="convergence", config=config.as_mapping(), config_digest=config.digest())
    levels = config.study_levels()
    with stage("spectrum", report.timings):
        solved = solve_problem(config.problem, levels, workers=config.workers, cache_dir=config.cache_dir)
    report.certification = certification_summary(solved)

    with stage("reconstruction", report.timings):
        report.add_table("reconstruction", _reconstruction_rows(solved, config, report))

    with stage("h_recovery", report.timings):
        try:
            rows = _h_rows(solved, config, report, _q_estimate(solved, config))
        except CaseMismatchError as exc:
            report.estimates["h_recovery"] = str(exc)
            rows = []
        report.add_table("h_recovery", rows)

    with stage("diagnostics", report.timings):
        x = PROBE_POINTS[1]
        q = config.problem.q
        report.add_table(
            "local_average",
            [
                {"n": a.n, "lambda_n": a.lam, "x": x, "value": a.value, "over_pi": a.over_pi, "q_x": float(q(x)), "pi_q_x": PI * float(q(x))}
                for a in local_average_check(solved.nodes, q, solved.spectrum, x)
            ],
        )
        asym = compute_c0_c1(config.problem)
        report.add_table(
            "asymptotics",
            [{"n": n, "remainder": r} for n, r in eigenvalue_remainders(solved.spectrum.as_dict(), asym)],
        )
        report.estimates.update({"c0": asym.c0, "c1": asym.c1})
    return report


def run_h_recovery_study(config: ExperimentConfig) -> RunReport:
    """h-recovery table only: per-level estimates, extrapolated values and kappa."""
    report = RunReport(study="recover_h", config=config.as_mapping(), config_digest=config.digest())
    with stage("spectrum", report.timings):
        solved = solve_problem(config.problem, config.study_levels(), workers=config.workers, cache_dir=config.cache_dir)
    report.certification = certification_summary(solved)
    with stage("h_recovery", report.timings):
        if solved.nodes.case_tag is NodalCase.CASE_II:
            raise CaseMismatchError("h recovery needs a Robin-start (Case I) problem")
        report.add_table("h_recovery", _h_rows(solved, config, report, _q_estimate(solved, config)))
    if isinstance(report.estimates.get("h_calibrated"), float) and math.isfinite(report.estimates["h_calibrated"]):
        report.estimates["h_error"] = abs(report.estimates["h_calibrated"] - config.problem.h)
    return report


def run_reconstruction(
    config: ExperimentConfig,
    nodes: Optional[NodalSet] = None,
    n: Optional[int] = None,
    order: int = 0,
) -> Tuple[RunReport, List[ReconstructionResult]]:
    """
    q (or q^(order)) from one level, for every configured mode.
    Without `nodes` the configured problem is solved and errors against its q
    are reported; an imported nodal set is used as given, with p from the config.
    """
    report = RunReport(study="reconstruct", config=config.as_mapping(), config_digest=config.digest())
    level = n or config.n_max
    if nodes is None:
        if order > config.problem.N:
            raise ConfigError("--order", f"order {order} exceeds the smoothness order N={config.problem.N} of the problem")
        with stage("spectrum", report.timings):
            solved = solve_problem(config.problem, [level], workers=config.workers, cache_dir=config.cache_dir)
        report.certification = certification_summary(solved)
        nodes, truth = solved.nodes, config.problem.q
    else:
        truth = None

    grid = reconstruction_grid(config.grid_size)
    results: List[ReconstructionResult] = []
    with stage("reconstruction", report.timings):
        for mode in config.modes:
            if order:
                if mode == ReconstructionMode.BARE_N.value:
                    continue
                result = reconstruct_q_deriv(nodes, level, nodes.lambda_for(level), config.problem.p, order, grid, mode)
            else:
                result = reconstruct_q(nodes, level, nodes.lambda_for(level), config.problem.p, grid, mode)
            if truth is not None:
                result = result.with_truth(truth)
                report.estimates[f"l1_error_{mode}"] = result.l1_error_vs_truth
            report.estimates[f"flagged_points_{mode}"] = int(result.flagged.sum())
            results.append(result)

    report.add_table(
        "reconstruction",
        [
            {"x": float(x), "value": float(v), "n": r.n_used, "lambda_n": r.lambda_used, "mode": r.mode.value, "order": r.order}
            for r in results
            for x, v in zip(r.grid, r.values)
        ],
    )
    return report, results
