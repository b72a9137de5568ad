"""
Phase (Prufer-type) form of the pencil equation.

With y = r sin(theta), y' = lambda r cos(theta) the equation
y'' + [lambda^2 - g(x)] y = 0, g = 2 lambda p + q, becomes

    theta' = lambda - (g / lambda) sin^2(theta)
    (ln r)' = (g / lambda) sin(theta) cos(theta)

The integrator works with the deviation phi = theta - lambda x, which stays
O(1) over [0, pi], so the relative tolerance acts on a small quantity.
Interior zeros of y are exactly the crossings of theta through k*pi; since
theta' = lambda > 0 there, every crossing is simple and one-directional.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from config.tolerances import MAX_PHASE_INCREMENT, MIN_STEP, NODE_PHASE_TOL, PHASE_ATOL, PHASE_RTOL, ROOT_RTOL
from domain.errors import DomainError, InconsistencyError, SolverNonconvergenceError
from domain.problem import BoundaryCase, PencilProblem
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi


@dataclass(frozen=True)
class PhaseTrace:
    lam: float
    x: NDArray[np.float64]
    theta: NDArray[np.float64]
    log_amplitude: NDArray[np.float64]
    sample_step: float
    case: BoundaryCase
    dense: Callable[[NDArray[np.float64]], NDArray[np.float64]] = field(repr=False, compare=False)

    @property
    def theta_start(self) -> float:
        return float(self.theta[0])

    @property
    def theta_end(self) -> float:
        return float(self.theta[-1])

    def theta_at(self, x):
        """theta and ln r at arbitrary abscissae from the dense output."""
        xs = np.asarray(x, dtype=float)
        phi, rho = self.dense(xs)
        return phi + self.lam * xs, rho

    def node_count(self) -> int:
        """Number of k >= 1 with k*pi strictly inside (theta(0), theta(pi))."""
        return interior_crossings(self.theta_start, self.theta_end)


def interior_crossings(theta_start: float, theta_end: float) -> int:
    if theta_end <= 0.0:
        return 0
    first = math.floor(theta_start / PI) + 1
    last = math.ceil(theta_end / PI) - 1
    return max(0, last - first + 1)


def initial_phase(problem: PencilProblem, lam: float, case: Optional[BoundaryCase] = None) -> float:
    """theta(0): cot(theta) = h/lambda for the Robin start, 0 for the Dirichlet start."""
    case = problem.case if case is None else case
    if case is BoundaryCase.DIRICHLET_INIT:
        return 0.0
    return 0.5 * PI - math.atan(problem.h_effective / lam)


def initial_amplitude(problem: PencilProblem, lam: float, case: Optional[BoundaryCase] = None) -> float:
    """r(0) giving phi(0) = 1 (Robin start) or psi'(0) = 1 (Dirichlet start)."""
    case = problem.case if case is None else case
    if case is BoundaryCase.DIRICHLET_INIT:
        return 1.0 / lam
    return 1.0 / math.sin(initial_phase(problem, lam, case))


def _rate_bound(problem: PencilProblem, lam: float) -> float:
    g_sup = 2.0 * lam * problem.p.sup_norm() + problem.q.sup_norm()
    return lam + g_sup / lam


def integrate_phase(problem: PencilProblem, lam: float, case: Optional[BoundaryCase] = None) -> PhaseTrace:
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"lambda must be finite and positive, got {lam!r}")
    case = problem.case if case is None else case
    p, q = problem.p.scalar(), problem.q.scalar()

    def rhs(x, y):
        phi = y[0]
        g = 2.0 * lam * p(x) + q(x)
        theta = lam * x + phi
        s = math.sin(theta)
        return [-(g / lam) * s * s, (g / lam) * s * math.cos(theta)]

    max_step = MAX_PHASE_INCREMENT / _rate_bound(problem, lam)
    theta0 = initial_phase(problem, lam, case)
    sol = solve_ivp(
        rhs,
        (0.0, PI),
        [theta0, 0.0],
        method="DOP853",
        rtol=PHASE_RTOL,
        atol=PHASE_ATOL,
        max_step=max_step,
        dense_output=True,
    )
    if not sol.success:
        raise SolverNonconvergenceError(f"phase integration failed at lambda={lam:.12g}: {sol.message}")
    # the final step may be clipped to land on pi
    steps = np.diff(sol.t)[:-1]
    if steps.size and float(steps.min()) < MIN_STEP:
        raise SolverNonconvergenceError(f"step control fell below {MIN_STEP:g} at lambda={lam:.12g}")

    samples = int(math.ceil(PI / max_step)) + 1
    xs = np.linspace(0.0, PI, samples)
    phi, rho = sol.sol(xs)
    theta = phi + lam * xs
    logger.debug(f"lambda={lam:.10g}: {sol.t.size - 1} steps, theta(pi)={theta[-1]:.12g}")
    return PhaseTrace(
        lam=float(lam),
        x=xs,
        theta=theta,
        log_amplitude=rho,
        sample_step=float(xs[1] - xs[0]),
        case=case,
        dense=sol.sol,
    )


def right_target(problem: PencilProblem, lam: float, n: int) -> float:
    """n*pi + arccot(-H/lambda), with arccot taking values in (0, pi)."""
    return n * PI + 0.5 * PI + math.atan(problem.H / lam)


def miss_distance(problem: PencilProblem, lam: float, n: int) -> float:
    return integrate_phase(problem, lam).theta_end - right_target(problem, lam, n)


def nodes_from_trace(trace: PhaseTrace) -> NDArray[np.float64]:
    """Interior zeros: theta crossing k*pi, refined on the dense output."""
    count = trace.node_count()
    first_k = math.floor(trace.theta_start / PI) + 1
    nodes: List[float] = []
    for k in range(first_k, first_k + count):
        level = k * PI
        idx = int(np.argmax(trace.theta >= level))
        lo = trace.x[max(idx - 1, 0)]
        hi = trace.x[min(idx, trace.x.size - 1)]

        def offset(x, level=level):
            return float(trace.theta_at(x)[0]) - level

        if offset(lo) > 0.0:
            lo = 0.0
        if offset(hi) < 0.0:
            hi = PI
        root = brentq(offset, lo, hi, xtol=1e-15, rtol=ROOT_RTOL, maxiter=200)
        if abs(offset(root)) > NODE_PHASE_TOL:
            raise InconsistencyError(f"node k={k} refined only to |theta - k pi| = {abs(offset(root)):.3g}")
        nodes.append(root)

    out = np.asarray(nodes, dtype=float)
    if out.size > 1 and not np.all(np.diff(out) > 0.0):
        raise InconsistencyError(f"refined nodes at lambda={trace.lam:.12g} are not strictly increasing")
    return out


def find_nodes(problem: PencilProblem, lambda_n: float) -> NDArray[np.float64]:
    return nodes_from_trace(integrate_phase(problem, lambda_n))


def eigenfunction_samples(
    problem: PencilProblem,
    lam: float,
    grid: NDArray[np.float64],
    case: Optional[BoundaryCase] = None,
) -> NDArray[np.float64]:
    """y = r(0) e^(ln r) sin(theta), normalized as phi(0) = 1 or psi'(0) = 1."""
    trace = integrate_phase(problem, lam, case)
    theta, rho = trace.theta_at(grid)
    return initial_amplitude(problem, lam, trace.case) * np.exp(rho) * np.sin(theta)
