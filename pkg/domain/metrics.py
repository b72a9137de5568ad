"""
Stability functionals between two nodal sequences X, Xbar with known p, pbar.

    S_n     = w_n sum_k |L_k^n - Lbar_k^n| + n int |p - pbar|
    S_{m,n} = w_m sum_k |delta^m L_k^n - delta^m Lbar_k^n|
              + lambda_n int |delta^m pbar(xbar_Jbar) - delta^m p(x_J)|
              + lambda_n int |pbar^(m) - p^(m)|

Levels are padded with pi to equal length inside the sums only. limsup over n
is estimated by the maximum over a trailing window.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from config.tolerances import LIMSUP_WINDOW
from domain.asymptotics import classify_case
from domain.errors import DomainError, InsufficientDataError
from domain.functions import RealFunction, l1_distance
from domain.nodal import NodalCase, NodalSet, difference_quotient, locate_indices
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi
TRIANGLE_SLACK = 1e-12


class MetricWeights(str, Enum):
    PAPER = "paper"
    CORRECTED = "corrected"


@dataclass(frozen=True)
class LimsupEstimate:
    value: float
    slope: float
    window: int


@dataclass(frozen=True)
class MetricSeries:
    values: Tuple[Tuple[int, float], ...]
    limsup: float
    bounded: float


@dataclass(frozen=True)
class MetricReport:
    per_n: Tuple[Tuple[int, float], ...]
    d0_hat: float
    dsigma_hat: float
    per_m: Dict[int, MetricSeries] = field(default_factory=dict)
    window: int = LIMSUP_WINDOW
    verdict_same_case: bool = True
    trend_slope: float = 0.0


# -----------------------------
# Bounded transform
# -----------------------------
def to_dsigma(d0: float) -> float:
    """x / (1 + x), with infinity mapped to 1."""
    if d0 < 0.0:
        raise DomainError(f"distance must be >= 0, got {d0}")
    return 1.0 if math.isinf(d0) else d0 / (1.0 + d0)


def to_d0(dsigma: float) -> float:
    if not 0.0 <= dsigma <= 1.0:
        raise DomainError(f"bounded distance must lie in [0, 1], got {dsigma}")
    return math.inf if dsigma == 1.0 else dsigma / (1.0 - dsigma)


# -----------------------------
# S_n
# -----------------------------
def padded_nodes(nodes: NDArray[np.float64], count: int) -> NDArray[np.float64]:
    if nodes.size >= count:
        return nodes[:count]
    return np.concatenate([nodes, np.full(count - nodes.size, PI)])


def s_n(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    n: int,
    weights: MetricWeights = MetricWeights.PAPER,
) -> float:
    weights = MetricWeights(weights)
    a, b = X.level(n), Xbar.level(n)
    count = max(n, a.size, b.size)
    diff = np.abs(np.diff(padded_nodes(a, count)) - np.diff(padded_nodes(b, count)))
    scale = n * n * PI if weights is MetricWeights.PAPER else float(n * n)
    return float(scale * diff.sum() + n * l1_distance(p, pbar))


def limsup_estimate(values: Sequence[Tuple[int, float]], window: int = LIMSUP_WINDOW) -> LimsupEstimate:
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    ordered = sorted(values)
    if len(ordered) < window:
        raise InsufficientDataError(f"limsup window {window} needs as many values, got {len(ordered)}")
    tail = ordered[-window:]
    ns = np.array([t[0] for t in tail], dtype=float)
    vals = np.array([t[1] for t in tail], dtype=float)
    slope = float(np.polyfit(ns, vals, 1)[0]) if window > 1 else 0.0
    return LimsupEstimate(value=float(vals.max()), slope=slope, window=window)


def case_of(X: NodalSet) -> NodalCase:
    """The stored tag when it names a case, else the classified one."""
    if X.case_tag in (NodalCase.CASE_I, NodalCase.CASE_II):
        return X.case_tag
    try:
        return classify_case(X)
    except InsufficientDataError:
        return NodalCase.UNKNOWN


def different_cases(X: NodalSet, Xbar: NodalSet) -> bool:
    known = (NodalCase.CASE_I, NodalCase.CASE_II)
    a, b = case_of(X), case_of(Xbar)
    return a in known and b in known and a != b


def s_n_sequence(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    n_range: Sequence[int],
    weights: MetricWeights = MetricWeights.PAPER,
) -> List[Tuple[int, float]]:
    return [(n, s_n(X, Xbar, p, pbar, n, weights)) for n in sorted(n_range)]


def dsigma(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    n_range: Sequence[int],
    window: int = LIMSUP_WINDOW,
    weights: MetricWeights = MetricWeights.PAPER,
) -> Tuple[float, float]:
    """(d0_hat, dsigma_hat); sets of different quasinodal cases sit at distance 1."""
    if different_cases(X, Xbar):
        return math.inf, 1.0
    est = limsup_estimate(s_n_sequence(X, Xbar, p, pbar, n_range, weights), window)
    return est.value, to_dsigma(est.value)


# -----------------------------
# S_{m,n}
# -----------------------------
def _delta_p(p: RealFunction, nodes: NDArray[np.float64], m: int) -> NDArray[np.float64]:
    if p.is_zero:
        return np.zeros(nodes.size - m)
    return difference_quotient(p(nodes), m)


def _step_integral(
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    da: NDArray[np.float64],
    db: NDArray[np.float64],
    lo: float,
    hi: float,
) -> float:
    """int_lo^hi |db[Jbar(x)] - da[J(x)]| dx with both step functions cut at their own nodes."""
    cuts = np.concatenate([[lo, hi], a[(a > lo) & (a < hi)], b[(b > lo) & (b < hi)]])
    cuts = np.unique(cuts)
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    ja = np.clip(locate_indices(a, mids), 1, da.size) - 1
    jb = np.clip(locate_indices(b, mids), 1, db.size) - 1
    return float(np.sum(np.abs(db[jb] - da[ja]) * np.diff(cuts)))


def s_mn_terms(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    m: int,
    n: int,
    lambda_n: float,
    corrected_weights: bool = False,
) -> Tuple[float, float, float]:
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    a_raw, b_raw = X.level(n), Xbar.level(n)
    count = max(n, a_raw.size, b_raw.size)
    if count - m - 2 < 1:
        raise InsufficientDataError(f"level n={n} is too short for order m={m}")
    a, b = padded_nodes(a_raw, count), padded_nodes(b_raw, count)
    dla = difference_quotient(np.diff(a), m)
    dlb = difference_quotient(np.diff(b), m)
    upper_k = count - m - 2
    weight = lambda_n**2 if corrected_weights else math.sqrt(lambda_n)
    first = weight * float(np.sum(np.abs(dla[:upper_k] - dlb[:upper_k])))

    lo, hi = float(a[0]), float(a[count - m - 2])
    if hi <= lo:
        return first, 0.0, 0.0
    middle = lambda_n * _step_integral(a_raw, b_raw, _delta_p(p, a_raw, m), _delta_p(pbar, b_raw, m), lo, hi)
    last = lambda_n * l1_distance(p, pbar, m, lo, hi)
    return first, middle, last


def s_mn(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    m: int,
    n: int,
    lambda_n: float,
    corrected_weights: bool = False,
) -> float:
    return float(sum(s_mn_terms(X, Xbar, p, pbar, m, n, lambda_n, corrected_weights)))


def s_mn_sequence(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    m: int,
    n_range: Sequence[int],
    corrected_weights: bool = False,
) -> List[Tuple[int, float]]:
    return [(n, s_mn(X, Xbar, p, pbar, m, n, X.lambda_for(n), corrected_weights)) for n in sorted(n_range)]


def build_metric_report(
    X: NodalSet,
    Xbar: NodalSet,
    p: RealFunction,
    pbar: RealFunction,
    n_range: Sequence[int],
    *,
    window: int = LIMSUP_WINDOW,
    weights: MetricWeights = MetricWeights.PAPER,
    m_values: Sequence[int] = (),
    corrected_weights: bool = True,
) -> MetricReport:
    if different_cases(X, Xbar):
        logger.info("nodal sets belong to different cases; distance short-circuits to 1")
        return MetricReport(per_n=(), d0_hat=math.inf, dsigma_hat=1.0, window=window, verdict_same_case=False)

    per_n = s_n_sequence(X, Xbar, p, pbar, n_range, weights)
    est = limsup_estimate(per_n, window)
    per_m: Dict[int, MetricSeries] = {}
    for m in m_values:
        seq = s_mn_sequence(X, Xbar, p, pbar, m, n_range, corrected_weights)
        dm = limsup_estimate(seq, window).value
        per_m[m] = MetricSeries(values=tuple(seq), limsup=dm, bounded=to_dsigma(dm))
    return MetricReport(
        per_n=tuple(per_n),
        d0_hat=est.value,
        dsigma_hat=to_dsigma(est.value),
        per_m=per_m,
        window=window,
        verdict_same_case=True,
        trend_slope=est.slope,
    )


# -----------------------------
# Pseudometric self-check
# -----------------------------
@dataclass(frozen=True)
class SelfcheckReport:
    distances: Tuple[Tuple[float, ...], ...]
    violations: Tuple[str, ...]
    index_deviation: Dict[Tuple[int, int], int]
    diagnostics: Dict[int, Dict[str, float]]

    @property
    def passed(self) -> bool:
        return not self.violations


def max_index_deviation(a: NDArray[np.float64], b: NDArray[np.float64], points: int = 1000) -> int:
    z = np.linspace(0.0, PI, points)
    return int(np.max(np.abs(locate_indices(a, z) - locate_indices(b, z))))


def node_diagnostics(X: NodalSet, n: int, reference: Optional[NodalSet] = None) -> Dict[str, float]:
    """n^2 max_k |L_k - pi/n| and, against a reference set, n^2 max_k |X_k - Xref_k|."""
    nodes = X.level(n)
    out = {"length_deviation": float(n * n * np.max(np.abs(np.diff(nodes) - PI / n))) if nodes.size > 1 else 0.0}
    if reference is not None:
        other = reference.level(n)
        k = min(nodes.size, other.size)
        out["node_deviation"] = float(n * n * np.max(np.abs(nodes[:k] - other[:k]))) if k else 0.0
    return out


def pseudometric_selfcheck(
    sets: Sequence[NodalSet],
    ps: Sequence[RealFunction],
    n_range: Sequence[int],
    window: int = LIMSUP_WINDOW,
    weights: MetricWeights = MetricWeights.PAPER,
) -> SelfcheckReport:
    """Checks the pseudometric axioms of dsigma on all pairs and triples; collects violations instead of raising."""
    if len(sets) < 3 or len(sets) != len(ps):
        raise DomainError("self-check needs at least three nodal sets, each with its p")
    size = len(sets)
    dist = [[dsigma(sets[i], sets[j], ps[i], ps[j], n_range, window, weights)[1] for j in range(size)] for i in range(size)]
    violations: List[str] = []

    for i in range(size):
        if dist[i][i] != 0.0:
            violations.append(f"d(X{i}, X{i}) = {dist[i][i]:.3g} != 0")
        for j in range(size):
            if dist[i][j] < 0.0:
                violations.append(f"d(X{i}, X{j}) = {dist[i][j]:.3g} < 0")
            if j > i and dist[i][j] != dist[j][i]:
                violations.append(f"d(X{i}, X{j}) != d(X{j}, X{i})")
    for i, j, k in itertools.permutations(range(size), 3):
        if dist[i][k] > dist[i][j] + dist[j][k] + TRIANGLE_SLACK:
            violations.append(f"triangle fails for (X{i}, X{j}, X{k})")

    n_top = max(n_range)
    deviation: Dict[Tuple[int, int], int] = {}
    for i, j in itertools.combinations(range(size), 2):
        if different_cases(sets[i], sets[j]):
            continue
        dev = max_index_deviation(sets[i].level(n_top), sets[j].level(n_top))
        deviation[(i, j)] = dev
        if dev > 1:
            violations.append(f"|J - Jbar| = {dev} > 1 for (X{i}, X{j}) at n={n_top}")

    diagnostics = {i: node_diagnostics(sets[i], n_top, sets[0]) for i in range(size)}
    for v in violations:
        logger.warning(v)
    return SelfcheckReport(
        distances=tuple(tuple(row) for row in dist),
        violations=tuple(violations),
        index_deviation=deviation,
        diagnostics=diagnostics,
    )
