"""
Closed asymptotic forms of the pencil problem: eigenvalues, nodal points,
nodal lengths, and the Case I / Case II classification of nodal sequences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Literal, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from config.tolerances import CLASSIFY
from domain.errors import DomainError, InsufficientDataError
from domain.functions import integrate, integrate_osc
from domain.nodal import NodalCase, NodalSet
from domain.problem import BoundaryCase, PencilProblem
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi

HShift = Literal["exact", "paper"]


@dataclass(frozen=True)
class NodalAsymptotics:
    c0: float
    c1: float
    case: BoundaryCase = BoundaryCase.ROBIN_INIT

    @property
    def offset(self) -> float:
        """1/2 for the Dirichlet start: its n-th eigenvalue sits near n + 1/2."""
        return 0.5 if self.case is BoundaryCase.DIRICHLET_INIT else 0.0


def compute_c0_c1(problem: PencilProblem) -> NodalAsymptotics:
    p, q = problem.p, problem.q
    c0 = integrate(p, 0.0, PI) / PI
    bulk = 0.5 * integrate(lambda t: q(t) + p(t) ** 2, 0.0, PI)
    if problem.case is BoundaryCase.DIRICHLET_INIT:
        c1 = (problem.H + bulk) / PI
    else:
        c1 = (problem.h_effective + problem.H + bulk) / PI
    return NodalAsymptotics(c0=c0, c1=c1, case=problem.case)


def lambda_asymptotic(n: int, asym: NodalAsymptotics) -> float:
    if n < 1:
        raise DomainError(f"index n must be >= 1, got {n}")
    return n + asym.offset + asym.c0 + asym.c1 / n


def eigenvalue_remainders(lambdas: Dict[int, float], asym: NodalAsymptotics) -> List[Tuple[int, float]]:
    """(n, n * |lambda_n - lambda_asymptotic(n)|): the c_{1,n} diagnostic."""
    return [(n, n * abs(lam - lambda_asymptotic(n, asym))) for n, lam in sorted(lambdas.items())]


def _node_correction(problem: PencilProblem, lam: float, upper: float, sign: float) -> float:
    """(1 / 2 lambda^2) * integral_0^upper (1 + sign*cos 2 lambda t)(q + 2 lambda p) dt."""
    if upper <= 0.0:
        return 0.0

    def g(t):
        return problem.effective_potential(t, lam)

    plain = integrate(g, 0.0, upper)
    osc = integrate_osc(g, 2.0 * lam, "cos", 0.0, upper)
    return (plain + sign * osc) / (2.0 * lam * lam)


def nodes_asymptotic(
    problem: PencilProblem,
    lambda_n: float,
    n: int,
    *,
    h_shift: HShift = "exact",
    passes: int = 1,
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Nodal points and lengths from their asymptotic expansions.

    Robin start:     X_j = (j - 1/2) pi / lambda + shift(h) + (1/2 lambda^2) int_0^X_j (1 + cos 2 lambda t) g
    Dirichlet start: X_j = j pi / lambda + (1/2 lambda^2) int_0^X_j (1 - cos 2 lambda t) g

    with g = q + 2 lambda p. X_j inside its own integral starts at the leading
    term and is refreshed `passes` times. shift(h) is h_eff / lambda^2 for
    h_shift="exact" (the p = q = 0 node shift) and -h / (2 lambda^2) for
    h_shift="paper".
    """
    if not (math.isfinite(lambda_n) and lambda_n > 0.0):
        raise DomainError(f"lambda_n must be finite and positive, got {lambda_n!r}")
    if h_shift not in ("exact", "paper"):
        raise DomainError(f"h_shift must be 'exact' or 'paper', got {h_shift!r}")
    lam = float(lambda_n)
    j = np.arange(1, n + 1, dtype=float)

    if problem.case is BoundaryCase.DIRICHLET_INIT:
        leading = j * PI / lam
        sign = -1.0
    else:
        leading = (j - 0.5) * PI / lam
        if h_shift == "exact":
            leading = leading + problem.h_effective / lam**2
        else:
            leading = leading - problem.h / (2.0 * lam**2)
        sign = 1.0

    nodes = leading.copy()
    for _ in range(max(1, passes)):
        upper = np.clip(nodes, 0.0, PI)
        nodes = leading + np.array([_node_correction(problem, lam, float(x), sign) for x in upper])

    def g(t):
        return problem.effective_potential(t, lam)

    inner = np.clip(nodes, 0.0, PI)
    lengths = np.empty(max(n - 1, 0))
    for k in range(n - 1):
        a, b = float(inner[k]), float(inner[k + 1])
        if b <= a:
            lengths[k] = PI / lam
            continue
        plain = integrate(g, a, b)
        osc = integrate_osc(g, 2.0 * lam, "cos", a, b)
        lengths[k] = PI / lam + (plain + sign * osc) / (2.0 * lam * lam)
    return nodes, lengths


# -----------------------------
# Free (p = q = 0) oracle
# -----------------------------
def free_robin_eigenvalue(h_eff: float, H: float, n: int, iterations: int = 200) -> float:
    """lambda = n + (atan(h/lambda) + atan(H/lambda)) / pi, solved by fixed-point iteration."""
    lam = float(n)
    for _ in range(iterations):
        nxt = n + (math.atan(h_eff / lam) + math.atan(H / lam)) / PI
        if abs(nxt - lam) <= 1e-15 * max(1.0, lam):
            return nxt
        lam = nxt
    return lam


def exact_free_nodes(h_eff: float, lam: float) -> NDArray[np.float64]:
    """Zeros of cos(lambda x) + (h/lambda) sin(lambda x) in (0, pi)."""
    alpha = math.atan(h_eff / lam)
    count = int(math.floor((lam * PI - alpha) / PI + 0.5))
    k = np.arange(1, count + 1, dtype=float)
    nodes = ((k - 0.5) * PI + alpha) / lam
    return nodes[(nodes > 0.0) & (nodes < PI)]


# -----------------------------
# Case classification
# -----------------------------
def _pattern_residual(nodes: NDArray[np.float64], case: NodalCase, degree: int) -> float:
    """
    Max deviation of the level from its best fit W(c_k), c_k = k - 1/2 (Case I)
    or k (Case II), where W is a polynomial with W(0) = 0. Degree 1 is the
    plain frequency fit; higher degrees absorb the smooth drift of the nodes.
    """
    k = np.arange(1, nodes.size + 1, dtype=float)
    c = k - 0.5 if case is NodalCase.CASE_I else k
    t = c / (c[-1] + 0.5)
    deg = max(1, min(degree, nodes.size - 3))
    basis = np.column_stack([t**d for d in range(1, deg + 1)])
    coef, *_ = np.linalg.lstsq(basis, nodes, rcond=None)
    return float(np.max(np.abs(nodes - basis @ coef)))


def _is_bounded(ns: Sequence[int], scores: Sequence[float]) -> bool:
    window = int(CLASSIFY["window"])
    tail_n = np.asarray(ns[-window:], dtype=float)
    tail = np.asarray(scores[-window:], dtype=float)
    floor = CLASSIFY["zero_floor"]
    if float(tail.max()) <= floor:
        return True
    median = float(np.median(tail))
    if tail.max() > CLASSIFY["max_over_median"] * max(median, floor):
        return False
    slope = float(np.polyfit(np.log(tail_n), np.log(np.maximum(tail, floor)), 1)[0])
    return slope <= CLASSIFY["max_log_slope"]


def classify_case(X: NodalSet) -> NodalCase:
    """
    Case I when n^2 * r_n stays bounded against the (k - 1/2) pi / n pattern
    only, Case II when it does against k pi / n only, else Indeterminate.
    Bounded means: trailing-window max within `max_over_median` times the
    median and a log-log growth slope not above `max_log_slope`.
    """
    ns = [n for n in X.indices if X.level(n).size >= 3]
    if len(ns) < int(CLASSIFY["min_levels"]):
        raise InsufficientDataError(
            f"classification needs {int(CLASSIFY['min_levels'])} levels with >= 3 nodes, got {len(ns)}"
        )
    degree = int(CLASSIFY["warp_degree"])
    verdict: Dict[NodalCase, bool] = {}
    for case in (NodalCase.CASE_I, NodalCase.CASE_II):
        scores = [n * n * _pattern_residual(X.level(n), case, degree) for n in ns]
        verdict[case] = _is_bounded(ns, scores)

    if verdict[NodalCase.CASE_I] and not verdict[NodalCase.CASE_II]:
        return NodalCase.CASE_I
    if verdict[NodalCase.CASE_II] and not verdict[NodalCase.CASE_I]:
        return NodalCase.CASE_II
    logger.warning(f"nodal set is indeterminate (case I bounded={verdict[NodalCase.CASE_I]}, case II bounded={verdict[NodalCase.CASE_II]})")
    return NodalCase.INDETERMINATE
