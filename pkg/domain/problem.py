from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict

from domain.errors import DomainError
from domain.functions import RealFunction


class BoundaryCase(str, Enum):
    """Left boundary condition: Robin y'(0) = h y(0), or y(0) = 0, y'(0) = 1."""

    ROBIN_INIT = "robin"
    DIRICHLET_INIT = "dirichlet"


class HConvention(str, Enum):
    """
    Which sign of h the left condition uses.

    BOUNDARY follows y'(0) - h y(0) = 0 as the boundary condition is written.
    SOLUTION follows the Volterra form phi = cos - (h/lambda) sin + ...,
    i.e. y'(0) = -h y(0).
    """

    BOUNDARY = "boundary"
    SOLUTION = "solution"


@dataclass(frozen=True)
class PencilProblem:
    """One instance of y'' + [lambda^2 - 2 lambda p(x) - q(x)] y = 0 on [0, pi]."""

    p: RealFunction = field(default_factory=RealFunction.zero)
    q: RealFunction = field(default_factory=RealFunction.zero)
    h: float = 0.0
    H: float = 0.0
    case: BoundaryCase = BoundaryCase.ROBIN_INIT
    N: int = 0
    h_convention: HConvention = HConvention.BOUNDARY

    def __post_init__(self) -> None:
        if not (math.isfinite(self.h) and math.isfinite(self.H)):
            raise DomainError("h and H must be finite")
        if self.N < 0:
            raise DomainError(f"N must be >= 0, got {self.N}")
        object.__setattr__(self, "case", BoundaryCase(self.case))
        object.__setattr__(self, "h_convention", HConvention(self.h_convention))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "H", float(self.H))

    @property
    def h_effective(self) -> float:
        """The h entering y'(0) = h_eff * y(0)."""
        return self.h if self.h_convention is HConvention.BOUNDARY else -self.h

    def effective_potential(self, x, lam: float):
        """Q_lambda(x) = 2 lambda p(x) + q(x)."""
        return 2.0 * lam * self.p(x) + self.q(x)

    def as_mapping(self) -> Dict[str, Any]:
        return {
            "p": self.p.as_mapping(),
            "q": self.q.as_mapping(),
            "h": self.h,
            "H": self.H,
            "case": self.case.value,
            "N": self.N,
            "h_convention": self.h_convention.value,
        }

    def digest(self) -> str:
        """Content hash; identical problems share cache files."""
        payload = json.dumps(self.as_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
