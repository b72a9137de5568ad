"""
Integral-equation form of the pencil solutions, an independent check on the
phase solver:

    phi(x) = cos(lx) + (h/l) sin(lx) + int_0^x sin(l(x - t))/l * g(t) phi(t) dt
    psi(x) = sin(lx)/l               + int_0^x sin(l(x - t))/l * g(t) psi(t) dt

with g = 2 l p + q and h the effective left-boundary slope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_simpson

from config.tolerances import VOLTERRA_MAX_ITER, VOLTERRA_SAMPLES, VOLTERRA_TOL
from domain.errors import DomainError, SolverNonconvergenceError
from domain.problem import PencilProblem
from utils.logging_config import get_logger

logger = get_logger(__name__)

PI = math.pi

Which = Literal["phi", "psi"]


@dataclass(frozen=True)
class SolutionTrace:
    lam: float
    which: str
    x: NDArray[np.float64]
    values: NDArray[np.float64]
    iterations: int


def solve_volterra(
    problem: PencilProblem,
    lam: float,
    which: Which,
    samples: int = VOLTERRA_SAMPLES,
) -> SolutionTrace:
    if not (math.isfinite(lam) and lam > 0.0):
        raise DomainError(f"lambda must be finite and positive, got {lam!r}")
    if which not in ("phi", "psi"):
        raise DomainError(f"which must be 'phi' or 'psi', got {which!r}")
    if samples < 3 or samples % 2 == 0:
        raise DomainError(f"samples must be odd and >= 3, got {samples}")

    x = np.linspace(0.0, PI, samples)
    c, s = np.cos(lam * x), np.sin(lam * x)
    g = problem.effective_potential(x, lam)
    if which == "phi":
        base = c + (problem.h_effective / lam) * s
    else:
        base = s / lam

    y = base.copy()
    for it in range(1, VOLTERRA_MAX_ITER + 1):
        # sin(l(x-t)) = sin(lx) cos(lt) - cos(lx) sin(lt)
        gy = g * y
        cos_part = cumulative_simpson(c * gy, x=x, initial=0.0)
        sin_part = cumulative_simpson(s * gy, x=x, initial=0.0)
        nxt = base + (s * cos_part - c * sin_part) / lam
        change = float(np.max(np.abs(nxt - y)))
        y = nxt
        if change <= VOLTERRA_TOL:
            logger.debug(f"{which} at lambda={lam:.10g}: converged in {it} sweeps")
            return SolutionTrace(lam=float(lam), which=which, x=x, values=y, iterations=it)

    raise SolverNonconvergenceError(
        f"Volterra sweeps for {which} at lambda={lam:.10g} did not settle within {VOLTERRA_MAX_ITER} iterations"
    )
