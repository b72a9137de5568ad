"""
Inverse nodal reconstruction: q, h and q^(m) from nodes, eigenvalues and the known p.

Nothing here ever sees q itself. Every formula reads a nodal interval
[x_j, x_{j+1}] of length l_j selected by j = j_n(x); grid points outside
the interior intervals use the nearest one and are flagged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import trapezoid

from domain.asymptotics import exact_free_nodes, free_robin_eigenvalue
from domain.errors import CaseMismatchError, DomainError, InsufficientDataError
from domain.functions import RealFunction, integrate, integrate_osc, interval_means
from domain.nodal import NodalCase, NodalSet, difference_quotient, locate_indices
from domain.problem import HConvention
from domain.spectrum import Spectrum
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi


class ReconstructionMode(str, Enum):
    PAPER = "paper"
    BARE_N = "bare_n"
    LINEARIZED = "linearized"
    CORRECTED = "corrected"


class HRecoveryMode(str, Enum):
    PAPER = "paper"
    CALIBRATED = "calibrated"


QEstimate = Union[None, RealFunction, Callable, Tuple[Sequence[float], Sequence[float]], "ReconstructionResult"]


@dataclass(frozen=True)
class ReconstructionResult:
    n_used: int
    lambda_used: float
    grid: NDArray[np.float64]
    values: NDArray[np.float64]
    mode: ReconstructionMode
    flagged: NDArray[np.bool_]
    order: int = 0
    l1_error_vs_truth: Optional[float] = None

    def with_truth(self, truth: RealFunction) -> "ReconstructionResult":
        """Attach the L1 distance to truth^(order) (trapezoid rule on the grid)."""
        err = float(trapezoid(np.abs(self.values - truth(self.grid, self.order)), self.grid))
        return replace(self, l1_error_vs_truth=err)


def _check_grid(grid) -> NDArray[np.float64]:
    xs = np.asarray(grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise DomainError("grid must be a non-empty 1-D sequence")
    if xs[0] < 0.0 or xs[-1] > PI:
        raise DomainError("grid must lie in [0, pi]")
    if xs.size > 1 and not np.all(np.diff(xs) > 0.0):
        raise DomainError("grid must be strictly increasing")
    return xs


def _interval_lookup(nodes: NDArray[np.float64], grid: NDArray[np.float64], count: int):
    """Interval index j_n(x) - 1 clipped to [0, count - 1], plus the flag mask."""
    idx = locate_indices(nodes, grid) - 1
    flagged = (idx < 0) | (idx > count - 1)
    return np.clip(idx, 0, count - 1), flagged


def _level(X: NodalSet, n: int, min_nodes: int) -> NDArray[np.float64]:
    nodes = X.level(n)
    if nodes.size < min_nodes:
        raise InsufficientDataError(f"level n={n} has {nodes.size} nodes, need at least {min_nodes}")
    return nodes


def corrected_interval_values(nodes: NDArray[np.float64], lam: float, p: RealFunction) -> NDArray[np.float64]:
    """Local-wavenumber inversion on each nodal interval: lambda^2 - 2 lambda mean(p) - (pi / l)^2."""
    lengths = np.diff(nodes)
    return lam * lam - 2.0 * lam * interval_means(p, nodes) - (PI / lengths) ** 2


def reconstruct_q(
    X: NodalSet,
    n: int,
    lambda_n: float,
    p: RealFunction,
    grid,
    mode: ReconstructionMode = ReconstructionMode.CORRECTED,
) -> ReconstructionResult:
    mode = ReconstructionMode(mode)
    xs = _check_grid(grid)
    nodes = _level(X, n, 2)
    lengths = np.diff(nodes)
    idx, flagged = _interval_lookup(nodes, xs, lengths.size)
    lam = float(lambda_n)
    l = lengths[idx]

    if mode is ReconstructionMode.PAPER:
        values = 2.0 * lam * (lam * lam * l - lam * PI - p(xs))
    elif mode is ReconstructionMode.BARE_N:
        values = 2.0 * n * (n * n * l - n * PI - p(xs))
    elif mode is ReconstructionMode.LINEARIZED:
        values = (2.0 * lam / PI) * (lam * lam * l - PI * lam - PI * p(xs))
    else:
        values = corrected_interval_values(nodes, lam, p)[idx]

    if flagged.any():
        logger.debug(f"n={n}: {int(flagged.sum())} grid points outside interior nodal intervals")
    return ReconstructionResult(
        n_used=n,
        lambda_used=lam,
        grid=xs,
        values=np.asarray(values, dtype=float),
        mode=mode,
        flagged=flagged,
    )


# -----------------------------
# Derivatives
# -----------------------------
def _divided_derivative(values: NDArray[np.float64], centers: NDArray[np.float64], m: int) -> NDArray[np.float64]:
    """m! times the m-th divided differences of values sampled at centers."""
    table = np.asarray(values, dtype=float)
    for order in range(1, m + 1):
        table = (table[1:] - table[:-1]) / (centers[order:] - centers[:-order])
    return math.factorial(m) * table


def reconstruct_q_deriv(
    X: NodalSet,
    n: int,
    lambda_n: float,
    p: RealFunction,
    m: int,
    grid,
    mode: ReconstructionMode = ReconstructionMode.CORRECTED,
) -> ReconstructionResult:
    """
    q^(m) from nodal lengths.

    paper:      (2 lambda^(3/2) / pi) delta^m l_j - 2 lambda delta^m p(x_j) - 2 lambda p^(m)(x)
    linearized: (2 lambda^3 / pi) delta^m l_j - 2 lambda p^(m)(x)
    corrected:  m-th divided difference of the corrected interval values,
                which for m = 1 equals (2 pi^2 / l_j^3) delta l_j - 2 lambda (mean p)'
                to first order in delta l_j.
    """
    mode = ReconstructionMode(mode)
    if mode is ReconstructionMode.BARE_N:
        raise DomainError("bare_n applies to q only, not to its derivatives")
    if m < 1:
        raise DomainError(f"derivative order must be >= 1, got {m}")
    xs = _check_grid(grid)
    nodes = _level(X, n, m + 2)
    lengths = np.diff(nodes)
    lam = float(lambda_n)

    if mode is ReconstructionMode.CORRECTED:
        centers = 0.5 * (nodes[:-1] + nodes[1:])
        seq = _divided_derivative(corrected_interval_values(nodes, lam, p), centers, m)
        idx, flagged = _interval_lookup(nodes, xs, seq.size)
        values = seq[idx]
    else:
        dl = difference_quotient(lengths, m)
        idx, flagged = _interval_lookup(nodes, xs, dl.size)
        p_m = p(xs, m)
        if mode is ReconstructionMode.LINEARIZED:
            values = (2.0 * lam**3 / PI) * dl[idx] - 2.0 * lam * p_m
        else:
            # delta^m of the zero sequence is taken as zero
            dp = np.zeros(nodes.size - m) if p.is_zero else difference_quotient(p(nodes), m)
            values = (2.0 * lam**1.5 / PI) * dl[idx] - 2.0 * lam * dp[idx] - 2.0 * lam * p_m

    return ReconstructionResult(
        n_used=n,
        lambda_used=lam,
        grid=xs,
        values=np.asarray(values, dtype=float),
        mode=mode,
        flagged=flagged,
        order=m,
    )


# -----------------------------
# Boundary parameter h
# -----------------------------
def richardson(sequence: Sequence[Tuple[int, float]]) -> float:
    """Limit of a_n = a + b/n + c/n^2 through the last three (n, a_n) pairs."""
    if len(sequence) < 3:
        raise InsufficientDataError(f"Richardson extrapolation needs 3 levels, got {len(sequence)}")
    tail = sorted(sequence)[-3:]
    ns = np.array([t[0] for t in tail], dtype=float)
    vals = np.array([t[1] for t in tail], dtype=float)
    system = np.column_stack([np.ones(3), 1.0 / ns, 1.0 / ns**2])
    return float(np.linalg.solve(system, vals)[0])


def _q_callable(q_est: QEstimate) -> Callable:
    if q_est is None:
        return lambda t: np.zeros_like(np.asarray(t, dtype=float))
    if isinstance(q_est, ReconstructionResult):
        grid, values = q_est.grid, q_est.values
        return lambda t: np.interp(t, grid, values)
    if isinstance(q_est, tuple):
        grid, values = (np.asarray(v, dtype=float) for v in q_est)
        return lambda t: np.interp(t, grid, values)
    return q_est


def paper_h_estimate(lam: float, x_j: float, j: int) -> float:
    """2 lambda pi (j - 1/2 - lambda x_j / pi)."""
    return 2.0 * lam * PI * (j - 0.5 - lam * x_j / PI)


def h_correction(lam: float, x_j: float, q_est: Callable, p: RealFunction) -> float:
    """int_0^x_j (1 + cos 2 lambda t)(q_est(t) + 2 lambda p(t)) dt."""

    def g(t):
        return np.asarray(q_est(t), dtype=float) + 2.0 * lam * p(t)

    return integrate(g, 0.0, x_j) + integrate_osc(g, 2.0 * lam, "cos", 0.0, x_j)


def calibration_factor(
    h_convention: HConvention = HConvention.BOUNDARY,
    j: int = 1,
    n_range: Sequence[int] = (16, 32, 64),
    h_ref: float = 0.5,
) -> float:
    """
    kappa = lim paper_h_estimate / h on exact p = q = 0 nodes. Under the
    boundary convention the node shift is +h / lambda^2 and kappa = -2; under
    the solution convention kappa = +2.
    """
    h_eff = h_ref if HConvention(h_convention) is HConvention.BOUNDARY else -h_ref
    seq = []
    for n in n_range:
        lam = free_robin_eigenvalue(h_eff, 0.0, n)
        nodes = exact_free_nodes(h_eff, lam)
        seq.append((n, paper_h_estimate(lam, float(nodes[j - 1]), j)))
    return richardson(seq) / h_ref


def h_estimates(
    X: NodalSet,
    spectrum: Spectrum,
    j: int,
    n_range: Sequence[int],
    q_est: QEstimate,
    p: RealFunction,
    mode: HRecoveryMode = HRecoveryMode.PAPER,
    kappa: Optional[float] = None,
    h_convention: HConvention = HConvention.BOUNDARY,
) -> List[Tuple[int, float]]:
    """
    Per-level h estimates; calibrated mode adds the dropped integral and divides
    by kappa, calibrated for `h_convention` when not given.
    """
    mode = HRecoveryMode(mode)
    if X.case_tag is NodalCase.CASE_II:
        raise CaseMismatchError("h recovery reads the Case I node offset; got a Case II nodal set")
    if j < 1:
        raise DomainError(f"node index j must be >= 1, got {j}")
    if mode is HRecoveryMode.CALIBRATED and kappa is None:
        kappa = calibration_factor(h_convention, j=j, n_range=n_range)
    q_fn = _q_callable(q_est)

    out: List[Tuple[int, float]] = []
    for n in sorted(n_range):
        lam = spectrum.lambda_of(n)
        nodes = X.level(n)
        if nodes.size < j:
            raise InsufficientDataError(f"level n={n} has no node j={j}")
        x_j = float(nodes[j - 1])
        value = paper_h_estimate(lam, x_j, j)
        if mode is HRecoveryMode.CALIBRATED:
            value = (value + h_correction(lam, x_j, q_fn, p)) / kappa
        out.append((n, value))
    return out


def recover_h(
    X: NodalSet,
    spectrum: Spectrum,
    j: int,
    n_range: Sequence[int],
    q_est: QEstimate,
    p: RealFunction,
    mode: HRecoveryMode = HRecoveryMode.PAPER,
    kappa: Optional[float] = None,
    h_convention: HConvention = HConvention.BOUNDARY,
) -> float:
    return richardson(h_estimates(X, spectrum, j, n_range, q_est, p, mode, kappa, h_convention))


# -----------------------------
# Local averages
# -----------------------------
@dataclass(frozen=True)
class LocalAverage:
    n: int
    lam: float
    value: float

    @property
    def over_pi(self) -> float:
        return self.value / PI


def local_average_check(X: NodalSet, q: RealFunction, spectrum: Spectrum, x: float) -> List[LocalAverage]:
    """lambda_n * int over the nodal interval containing x of q, for every level with an eigenvalue."""
    if not (0.0 < x < PI):
        raise DomainError(f"x={x!r} must lie in (0, pi)")
    known = set(spectrum.indices)
    out: List[LocalAverage] = []
    for n in X.indices:
        nodes = X.level(n)
        if n not in known or nodes.size < 2:
            continue
        lam = spectrum.lambda_of(n)
        i = int(np.clip(locate_indices(nodes, x) - 1, 0, nodes.size - 2))
        out.append(LocalAverage(n=n, lam=lam, value=lam * integrate(q, float(nodes[i]), float(nodes[i + 1]))))
    return out
