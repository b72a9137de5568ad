"""
Named self-check targets.

Each target runs a fixed desk-scale experiment on bundled problems and
returns one row per check: (target, check, value, threshold, passed).
The pseudometric target takes the configured problems instead when
problem, bar and extra number three or more.
Targets never raise on a failed check; solver and configuration failures
propagate to the caller.
"""
from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from application.container import get_bundled_pair, get_bundled_problem, get_bundled_triple
from application.convergence_study import fitted_constant, reconstruction_grid, run_convergence_study
from application.experiment import ExperimentConfig, RunReport
from application.highorder_study import run_highorder_study
from application.pipeline import SolvedProblem, solve_problem, stage
from application.stability_study import run_stability_study
from config.run_defaults import PROBE_POINTS
from domain.asymptotics import compute_c0_c1, eigenvalue_remainders
from domain.errors import ConfigError
from domain.functions import PI, RealFunction
from domain.metrics import dsigma, pseudometric_selfcheck
from domain.nodal import NodalCase, synthetic_nodal_set
from domain.phase import eigenfunction_samples
from domain.problem import BoundaryCase, PencilProblem
from domain.reconstruction import (
    HRecoveryMode,
    ReconstructionMode,
    calibration_factor,
    reconstruct_q,
    reconstruct_q_deriv,
    recover_h,
)
from domain.spectrum import l2_norm, orthogonality_defect
from domain.volterra import solve_volterra
from infrastructure.csv_repository import dataframe_to_csv_text, report_tree
from utils.logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class CheckRow:
    target: str
    check: str
    value: float
    threshold: float
    passed: bool

    def as_row(self) -> Dict[str, Any]:
        return {
            "target": self.target,
            "check": self.check,
            "value": self.value,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def _at_most(target: str, check: str, value: float, threshold: float) -> CheckRow:
    return CheckRow(target, check, float(value), float(threshold), bool(value <= threshold))


def _within(target: str, check: str, value: Optional[float], lo: float, hi: float) -> CheckRow:
    ok = value is not None and lo <= value <= hi
    return CheckRow(target, f"{check} in [{lo:g}, {hi:g}]", float("nan") if value is None else float(value), hi, ok)


@dataclass(frozen=True)
class CheckContext:
    workers: int
    cache_dir: Optional[str]
    # problem, bar and extra problems of the configuration, when there are three or more
    problems: Tuple[PencilProblem, ...] = ()

    def solve(self, name: str, levels: Sequence[int]) -> SolvedProblem:
        return solve_problem(get_bundled_problem(name), levels, workers=self.workers, cache_dir=self.cache_dir)


# -----------------------------
# Targets
# -----------------------------
def trivial_exactness(ctx: CheckContext) -> List[CheckRow]:
    name = "trivial_exactness"
    levels = list(range(1, 51))
    solved = ctx.solve("trivial", levels)
    lam_err = max(abs(solved.spectrum.lambda_of(n) - n) for n in levels)
    node_err = max(
        float(np.max(np.abs(solved.nodes.level(n) - (np.arange(1, n + 1) - 0.5) * PI / n))) for n in levels
    )
    grid = reconstruction_grid(256)
    q_err = max(
        float(np.max(np.abs(reconstruct_q(solved.nodes, n, solved.spectrum.lambda_of(n), RealFunction.zero(), grid).values)))
        for n in levels
        if n >= 2
    )
    return [
        _at_most(name, "max |lambda_n - n|", lam_err, 1e-8),
        _at_most(name, "max node error", node_err, 1e-8),
        _at_most(name, "max |F_n| corrected", q_err, 1e-9),
    ]


def constant_oracle(ctx: CheckContext) -> List[CheckRow]:
    name = "constant_oracle"
    problem = get_bundled_problem("constant")
    p0, q0 = float(problem.p(0.0)), float(problem.q(0.0))
    levels = list(range(1, 51))
    solved = ctx.solve("constant", sorted(set(levels) | {64, 128}))
    lam_err = max(abs(solved.spectrum.lambda_of(n) - (p0 + math.sqrt(p0 * p0 + q0 + n * n))) for n in levels)
    spacing = max(float(np.ptp(np.diff(solved.nodes.level(n)))) for n in levels if n >= 3)
    ns = [16, 32, 64, 128]
    grid = reconstruction_grid(512)
    errors = [
        reconstruct_q(solved.nodes, n, solved.spectrum.lambda_of(n), problem.p, grid).with_truth(problem.q).l1_error_vs_truth
        for n in ns
    ]
    return [
        _at_most(name, "max |lambda_n - closed form|", lam_err, 1e-8),
        _at_most(name, "max spread of nodal lengths", spacing, 1e-9),
        _at_most(name, "fitted C in |F_n - q0| <= C/n", fitted_constant(ns, errors), 20.0),
    ]


def eigenvalue_asymptotics(ctx: CheckContext) -> List[CheckRow]:
    name = "eigenvalue_asymptotics"
    early, late = list(range(50, 58)), list(range(93, 101))
    solved = ctx.solve("smooth", early + late)
    asym = compute_c0_c1(solved.problem)
    rem = dict(eigenvalue_remainders(solved.spectrum.as_dict(), asym))
    first = statistics.median(rem[n] for n in early)
    second = statistics.median(rem[n] for n in late)
    return [_at_most(name, "median remainder n=93..100 vs n=50..57", second, first)]


def reconstruction_convergence(ctx: CheckContext) -> List[CheckRow]:
    name = "reconstruction_convergence"
    solved = ctx.solve("smooth", [16, 64])
    problem = solved.problem
    grid = reconstruction_grid(1024)
    probes = np.asarray(PROBE_POINTS)

    def run(n, xs):
        return reconstruct_q(solved.nodes, n, solved.spectrum.lambda_of(n), problem.p, xs)

    e16 = run(16, grid).with_truth(problem.q).l1_error_vs_truth
    e64 = run(64, grid).with_truth(problem.q).l1_error_vs_truth
    rows = [_at_most(name, "L1 error n=64 / n=16", e64 / e16 if e16 else 0.0, 0.6)]
    p16 = np.abs(run(16, probes).values - problem.q(probes))
    p64 = np.abs(run(64, probes).values - problem.q(probes))
    for x, a, b in zip(probes, p16, p64):
        # errors already below the floor count as converged
        rows.append(_at_most(name, f"pointwise error at x={x:g}, n=64 vs n=16", float(b), max(float(a), 1e-3)))
    return rows


def h_recovery(ctx: CheckContext) -> List[CheckRow]:
    name = "h_recovery"
    ns = (16, 32, 64)
    solved = ctx.solve("h_oracle", ns)
    q_est = reconstruct_q(
        solved.nodes, 64, solved.spectrum.lambda_of(64), solved.problem.p, reconstruction_grid(512)
    )
    kappa = calibration_factor(solved.problem.h_convention, 1, ns)
    h_hat = recover_h(solved.nodes, solved.spectrum, 1, ns, q_est, solved.problem.p, HRecoveryMode.CALIBRATED, kappa)
    kappas = [calibration_factor(solved.problem.h_convention, 1, ns, h_ref=h) for h in (0.25, 0.5, 1.0)]
    spread = (max(kappas) - min(kappas)) / abs(statistics.mean(kappas))
    return [
        _at_most(name, "|h_calibrated - h|", abs(h_hat - solved.problem.h), 2e-2),
        _at_most(name, "relative spread of kappa over h in {0.25, 0.5, 1}", spread, 0.05),
    ]


def _pair_config(pair: str, **run: Any) -> ExperimentConfig:
    problem, problem_bar = get_bundled_pair(pair)
    return ExperimentConfig(problem=problem, problem_bar=problem_bar, **run)


def lipschitz_identity(ctx: CheckContext) -> List[CheckRow]:
    name = "lipschitz_identity"
    config = _pair_config("smooth_pair", n_min=8, n_max=128, window=8, workers=ctx.workers, cache_dir=ctx.cache_dir)
    est = run_stability_study(config).estimates
    return [
        _within(name, "||q - qbar||_1 / (2 d0_hat)", est.get("identity_ratio"), 0.8, 1.2),
        _at_most(name, "dsigma/d0 round trip", est.get("round_trip_error", math.inf), 1e-12),
    ]


def case_separation(ctx: CheckContext) -> List[CheckRow]:
    name = "case_separation"
    levels = list(range(8, 24))
    first = synthetic_nodal_set(NodalCase.CASE_I, levels).tagged(NodalCase.UNKNOWN)
    second = synthetic_nodal_set(NodalCase.CASE_II, levels).tagged(NodalCase.UNKNOWN)
    zero = RealFunction.zero()
    _, bounded = dsigma(first, second, zero, zero, levels, 8)
    config = _pair_config("case_pair", n_min=8, n_max=24, window=8, workers=ctx.workers, cache_dir=ctx.cache_dir)
    solved = run_stability_study(config).estimates["dsigma_hat"]
    return [
        CheckRow(name, "dsigma_hat classified synthetic sets == 1", bounded, 1.0, bounded == 1.0),
        CheckRow(name, "dsigma_hat solver sets == 1", solved, 1.0, solved == 1.0),
    ]


def pseudometric_axioms(ctx: CheckContext) -> List[CheckRow]:
    name = "pseudometric_axioms"
    levels = list(range(57, 65))
    problems = list(ctx.problems) if len(ctx.problems) >= 3 else get_bundled_triple("smooth_triple")
    sets = [solve_problem(p, levels, workers=ctx.workers, cache_dir=ctx.cache_dir).nodes for p in problems]
    result = pseudometric_selfcheck(sets, [p.p for p in problems], levels, window=8)
    rows = [CheckRow(name, "violations", float(len(result.violations)), 0.0, result.passed)]
    for (i, j), dev in sorted(result.index_deviation.items()):
        rows.append(_at_most(name, f"max |J - Jbar| for (X{i}, X{j}) at n=64", dev, 1))
    return rows


def highorder_identity(ctx: CheckContext) -> List[CheckRow]:
    name = "highorder_identity"
    config = _pair_config(
        "smooth_pair",
        n_min=32,
        n_max=128,
        levels=(32, 128),
        window=8,
        m_max=1,
        modes=(ReconstructionMode.CORRECTED.value,),
        workers=ctx.workers,
        cache_dir=ctx.cache_dir,
    )
    report = run_highorder_study(config)
    ratio = report.estimates["m1"]["identity_ratio"]
    errors = report.tables["derivative_reconstruction"].set_index("n")["l1_error"]
    return [
        _within(name, "||q' - qbar'||_1 / (2 d1_hat)", ratio, 0.7, 1.3),
        _at_most(name, "q' L1 error n=128 / n=32", float(errors[128] / errors[32]), 0.7),
    ]


def solver_cross_validation(ctx: CheckContext) -> List[CheckRow]:
    name = "solver_cross_validation"
    levels = list(range(1, 13))
    solved = ctx.solve("smooth", levels)
    problem = solved.problem
    lams = [solved.spectrum.lambda_of(n) for n in levels if solved.spectrum.lambda_of(n) <= 20.0] + [20.0]
    worst = 0.0
    for lam in lams:
        trace = solve_volterra(problem, lam, "phi")
        worst = max(worst, float(np.max(np.abs(trace.values - eigenfunction_samples(problem, lam, trace.x)))))
    trace = solve_volterra(problem, 7.5, "psi")
    psi = eigenfunction_samples(problem, 7.5, trace.x, BoundaryCase.DIRICHLET_INIT)
    worst = max(worst, float(np.max(np.abs(trace.values - psi))))

    norms = {n: l2_norm(problem, solved.spectrum.lambda_of(n)) for n in levels}
    defect = max(
        orthogonality_defect(problem, solved.spectrum, m, n) / (norms[m] * norms[n])
        for m in levels
        for n in levels
        if m < n
    )
    return [
        _at_most(name, "sup |Volterra - phase| for lambda <= 20", worst, 1e-6),
        _at_most(name, "max relative orthogonality defect, m != n <= 12", defect, 1e-6),
    ]


def determinism(ctx: CheckContext) -> List[CheckRow]:
    name = "determinism"
    config = ExperimentConfig(problem=get_bundled_problem("smooth"), n_min=8, n_max=32, workers=ctx.workers, cache_dir=None)
    runs = [run_convergence_study(config) for _ in range(2)]
    texts = [
        [dataframe_to_csv_text(r.tables[t]) for t in sorted(r.tables)] + [json.dumps(report_tree(r), sort_keys=True)]
        for r in runs
    ]
    same = texts[0] == texts[1]
    return [CheckRow(name, "two cold runs give identical tables and reports", float(not same), 0.0, same)]


SELFCHECK_TARGETS: Dict[str, Callable[[CheckContext], List[CheckRow]]] = {
    "trivial_exactness": trivial_exactness,
    "constant_oracle": constant_oracle,
    "eigenvalue_asymptotics": eigenvalue_asymptotics,
    "reconstruction_convergence": reconstruction_convergence,
    "h_recovery": h_recovery,
    "lipschitz_identity": lipschitz_identity,
    "case_separation": case_separation,
    "pseudometric_axioms": pseudometric_axioms,
    "highorder_identity": highorder_identity,
    "solver_cross_validation": solver_cross_validation,
    "determinism": determinism,
}


# -----------------------------
# Runner
# -----------------------------
def _discrepancy_rows(config: ExperimentConfig) -> List[Dict[str, Any]]:
    """Per level of the configured problem: each mode's L1 error and the gap between them."""
    solved = solve_problem(config.problem, config.study_levels(), workers=config.workers, cache_dir=config.cache_dir)
    problem = solved.problem
    grid = reconstruction_grid(config.grid_size)
    rows = []
    for n in solved.nodes.indices:
        lam = solved.spectrum.lambda_of(n)
        paper = reconstruct_q(solved.nodes, n, lam, problem.p, grid, ReconstructionMode.PAPER).with_truth(problem.q)
        corrected = reconstruct_q(solved.nodes, n, lam, problem.p, grid, ReconstructionMode.CORRECTED).with_truth(problem.q)
        gap = float(trapezoid(np.abs(paper.values - corrected.values), grid))
        row = {
            "n": n,
            "lambda_n": lam,
            "l1_error_paper": paper.l1_error_vs_truth,
            "l1_error_corrected": corrected.l1_error_vs_truth,
            "paper_minus_corrected": gap,
        }
        if problem.N >= 1 and solved.nodes.level(n).size >= 3:
            deriv = reconstruct_q_deriv(solved.nodes, n, lam, problem.p, 1, grid).with_truth(problem.q)
            row["l1_error_deriv_corrected"] = deriv.l1_error_vs_truth
        rows.append(row)
    return rows


def run_selfcheck(
    config: ExperimentConfig,
    targets: Optional[Sequence[str]] = None,
    *,
    discrepancy: bool = True,
) -> RunReport:
    """
    Runs the named targets (all by default) with the worker pool and cache of
    `config`. With `discrepancy`, also tabulates the gap between the `paper`
    and `corrected` modes for the configured problem.
    """
    names = list(targets) if targets else list(SELFCHECK_TARGETS)
    unknown = [t for t in names if t not in SELFCHECK_TARGETS]
    if unknown:
        raise ConfigError("--target", f"unknown selfcheck target {unknown[0]!r}; known: {', '.join(SELFCHECK_TARGETS)}")

    report = RunReport(study="selfcheck", config=config.as_mapping(), config_digest=config.digest())
    configured = tuple(p for p in (config.problem, config.problem_bar, *config.extra) if p is not None)
    ctx = CheckContext(workers=config.workers, cache_dir=config.cache_dir, problems=configured)

    rows: List[CheckRow] = []
    for name in names:
        with stage(name, report.timings):
            found = SELFCHECK_TARGETS[name](ctx)
        for row in found:
            if not row.passed:
                logger.warning(f"{row.target}: {row.check} = {row.value:.6g} (threshold {row.threshold:.6g})")
        rows.extend(found)
    report.add_table("checks", [r.as_row() for r in rows])

    if discrepancy:
        with stage("discrepancy", report.timings):
            report.add_table("discrepancy", _discrepancy_rows(config))

    failed = sorted({r.target for r in rows if not r.passed})
    report.estimates.update({"targets": names, "failed": failed, "passed": not failed})
    return report

