from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from config.tolerances import (
    BRACKET_EXPANSION_STEP,
    BRACKET_HALF_WIDTH,
    BRACKET_MAX_EXPANSION,
    MISSDISTANCE_TOL,
    ROOT_RTOL,
)
from domain.asymptotics import compute_c0_c1, lambda_asymptotic
from domain.errors import (
    CertificationError,
    DomainError,
    InconsistencyError,
    MissingLevelError,
    PencilLabError,
    SolverNonconvergenceError,
    with_index,
)
from domain.functions import integrate, oscillatory_panels
from domain.phase import initial_amplitude, integrate_phase, miss_distance, nodes_from_trace, right_target
from domain.problem import PencilProblem
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi
_LAMBDA_FLOOR = 1e-6

Mapper = Callable[..., Iterable]


@dataclass(frozen=True)
class SpectrumEntry:
    n: int
    lam: float
    residual: float
    node_count: int


@dataclass(frozen=True)
class LevelSolution:
    """One certified eigenvalue together with the nodes of its eigenfunction."""

    entry: SpectrumEntry
    nodes: NDArray[np.float64]


@dataclass(frozen=True)
class Spectrum:
    entries: Tuple[SpectrumEntry, ...]
    problem_digest: str

    def __post_init__(self) -> None:
        entries = tuple(sorted(self.entries, key=lambda e: e.n))
        object.__setattr__(self, "entries", entries)
        for e in entries:
            if e.n < 1:
                raise InconsistencyError(f"spectral index must be >= 1, got {e.n}")
            if not e.residual <= MISSDISTANCE_TOL:
                raise InconsistencyError(f"n={e.n}: residual {e.residual:.3g} above {MISSDISTANCE_TOL:g}")
        for a, b in zip(entries, entries[1:]):
            if b.n == a.n:
                raise InconsistencyError(f"duplicate spectral index n={a.n}")
            if not b.lam > a.lam:
                raise InconsistencyError(f"lambda not increasing between n={a.n} and n={b.n}")
            if b.node_count - a.node_count != b.n - a.n:
                raise InconsistencyError(
                    f"node counts {a.node_count} (n={a.n}) and {b.node_count} (n={b.n}) skip an index"
                )

    @property
    def indices(self) -> List[int]:
        return [e.n for e in self.entries]

    def as_dict(self) -> Dict[int, float]:
        return {e.n: e.lam for e in self.entries}

    def lambda_of(self, n: int) -> float:
        for e in self.entries:
            if e.n == n:
                return e.lam
        raise MissingLevelError(n)


# -----------------------------
# Single eigenvalue
# -----------------------------
def _bracket(problem: PencilProblem, n: int, seed: float) -> Tuple[float, float, float, float]:
    half = BRACKET_HALF_WIDTH
    while True:
        lo = max(seed - half, _LAMBDA_FLOOR)
        hi = seed + half
        f_lo = miss_distance(problem, lo, n)
        f_hi = miss_distance(problem, hi, n)
        if f_lo * f_hi <= 0.0:
            return lo, hi, f_lo, f_hi
        if half >= BRACKET_MAX_EXPANSION:
            raise SolverNonconvergenceError(
                f"no sign change of the miss-distance within +/-{BRACKET_MAX_EXPANSION:g} of seed {seed:.10g}"
            )
        half = min(half + BRACKET_EXPANSION_STEP, BRACKET_MAX_EXPANSION)
        logger.debug(f"n={n}: expanding bracket to +/-{half:.2f} around {seed:.10g}")


def solve_level(problem: PencilProblem, n: int) -> LevelSolution:
    """Bracket around the asymptotic seed, refine with brentq, certify by oscillation count."""
    if n < 1:
        raise DomainError(f"index n must be >= 1, got {n}")
    try:
        seed = max(lambda_asymptotic(n, compute_c0_c1(problem)), 0.5)
        lo, hi, f_lo, f_hi = _bracket(problem, n, seed)
        if f_lo == 0.0:
            lam = lo
        elif f_hi == 0.0:
            lam = hi
        else:
            lam = brentq(lambda t: miss_distance(problem, t, n), lo, hi, xtol=1e-14, rtol=ROOT_RTOL, maxiter=200)
        trace = integrate_phase(problem, lam)
        residual = abs(trace.theta_end - right_target(problem, lam, n))
        if residual > MISSDISTANCE_TOL:
            raise SolverNonconvergenceError(f"miss-distance {residual:.3g} above {MISSDISTANCE_TOL:g} at lambda={lam:.12g}")
        count = trace.node_count()
        if count != n:
            raise CertificationError(n, count, lam)
        nodes = nodes_from_trace(trace)
    except PencilLabError as exc:
        raise with_index(exc, n)
    except (ValueError, RuntimeError) as exc:
        # scipy root-finder and integrator failures
        raise with_index(SolverNonconvergenceError(str(exc)), n) from exc
    logger.debug(f"n={n}: lambda={lam:.14g} residual={residual:.2e}")
    return LevelSolution(SpectrumEntry(n=n, lam=float(lam), residual=float(residual), node_count=count), nodes)


def find_eigenvalue(problem: PencilProblem, n: int) -> Tuple[float, float]:
    entry = solve_level(problem, n).entry
    return entry.lam, entry.residual


def compute_spectrum(
    problem: PencilProblem,
    n_max: int,
    *,
    n_min: int = 1,
    indices: Optional[Sequence[int]] = None,
    mapper: Mapper = map,
) -> Spectrum:
    """
    Eigenvalues for n_min..n_max (or an explicit index list).

    `mapper` fans the per-index work out; pass an executor's `map` to run it
    on a worker pool. Entries are merged by index, so the order of completion
    never shows in the result.
    """
    if n_max < 1:
        raise DomainError(f"n_max must be >= 1, got {n_max}")
    wanted = sorted(set(indices)) if indices is not None else list(range(n_min, n_max + 1))
    solutions = list(mapper(solve_level, [problem] * len(wanted), wanted))
    return spectrum_from_levels(problem, solutions)


def spectrum_from_levels(problem: PencilProblem, solutions: Iterable[LevelSolution]) -> Spectrum:
    return Spectrum(entries=tuple(s.entry for s in solutions), problem_digest=problem.digest())


# -----------------------------
# Orthogonality diagnostic
# -----------------------------
def _eigenfunction(problem: PencilProblem, lam: float) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
    trace = integrate_phase(problem, lam)
    r0 = initial_amplitude(problem, lam, trace.case)

    def y(x):
        theta, rho = trace.theta_at(x)
        return r0 * np.exp(rho) * np.sin(theta)

    return y


def l2_norm(problem: PencilProblem, lam: float) -> float:
    y = _eigenfunction(problem, lam)
    return math.sqrt(integrate(lambda x: y(x) ** 2, 0.0, PI, panels=oscillatory_panels(2.0 * lam, 0.0, PI)))


def orthogonality_defect(problem: PencilProblem, spectrum: Spectrum, m: int, n: int) -> float:
    """|int_0^pi [2 p(x) - lambda_m - lambda_n] y_m y_n dx| for two eigenfunctions."""
    if m == n:
        raise DomainError("orthogonality needs two distinct indices")
    lam_m, lam_n = spectrum.lambda_of(m), spectrum.lambda_of(n)
    y_m = _eigenfunction(problem, lam_m)
    y_n = _eigenfunction(problem, lam_n)
    p = problem.p

    def integrand(x):
        return (2.0 * p(x) - lam_m - lam_n) * y_m(x) * y_n(x)

    panels = oscillatory_panels(lam_m + lam_n, 0.0, PI)
    return abs(integrate(integrand, 0.0, PI, panels=panels))
