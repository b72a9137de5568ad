from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from domain.errors import DifferenceQuotientZeroDivision, DomainError, InsufficientDataError, MissingLevelError

PI = math.pi


class NodalCase(str, Enum):
    CASE_I = "I"
    CASE_II = "II"
    UNKNOWN = "unknown"
    INDETERMINATE = "indeterminate"


class NodalSource(str, Enum):
    SOLVER = "solver"
    ASYMPTOTIC = "asymptotic"
    SYNTHETIC = "synthetic"
    FILE = "file"


def _frozen(values: Iterable[float]) -> NDArray[np.float64]:
    arr = np.array(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NodalSet:
    """
    Double sequence X = {X_k^n}: for every level n a strictly increasing list of
    abscissae in (0, pi). Virtual endpoints X_0^n = 0 and the padding X_k^n = pi
    used by the metrics are never stored.
    """

    levels: Mapping[int, NDArray[np.float64]]
    case_tag: NodalCase = NodalCase.UNKNOWN
    source: NodalSource = NodalSource.SYNTHETIC
    lambdas: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: Dict[int, NDArray[np.float64]] = {}
        for n in sorted(self.levels):
            nodes = _frozen(self.levels[n])
            if n < 1:
                raise DomainError(f"level index must be >= 1, got {n}")
            if nodes.size and (nodes[0] <= 0.0 or nodes[-1] >= PI):
                raise DomainError(f"level n={n}: nodes must lie strictly inside (0, pi)")
            if nodes.size > 1 and not np.all(np.diff(nodes) > 0.0):
                raise DomainError(f"level n={n}: nodes must be strictly increasing")
            clean[int(n)] = nodes
        counts = [clean[n].size for n in clean]
        if any(b < a for a, b in zip(counts, counts[1:])):
            raise DomainError("node count K(n) must be nondecreasing in n")
        object.__setattr__(self, "levels", clean)
        object.__setattr__(self, "lambdas", {int(n): float(v) for n, v in dict(self.lambdas).items()})
        object.__setattr__(self, "case_tag", NodalCase(self.case_tag))
        object.__setattr__(self, "source", NodalSource(self.source))

    def __eq__(self, other) -> bool:
        if not isinstance(other, NodalSet):
            return NotImplemented
        return (
            list(self.levels) == list(other.levels)
            and all(np.array_equal(self.levels[n], other.levels[n]) for n in self.levels)
            and self.case_tag == other.case_tag
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def indices(self) -> List[int]:
        return list(self.levels)

    def level(self, n: int) -> NDArray[np.float64]:
        try:
            return self.levels[n]
        except KeyError:
            raise MissingLevelError(n) from None

    def lambda_for(self, n: int) -> float:
        """The eigenvalue stored with level n, falling back to n itself."""
        return self.lambdas.get(n, float(n))

    def tagged(self, case: NodalCase) -> "NodalSet":
        return NodalSet(levels=self.levels, case_tag=case, source=self.source, lambdas=self.lambdas)

    def restricted(self, indices: Iterable[int]) -> "NodalSet":
        """The same set keeping only the given levels."""
        keep = set(indices)
        return NodalSet(
            levels={n: v for n, v in self.levels.items() if n in keep},
            case_tag=self.case_tag,
            source=self.source,
            lambdas={n: v for n, v in self.lambdas.items() if n in keep},
        )


def synthetic_nodal_set(case: NodalCase, levels: Sequence[int]) -> NodalSet:
    """Exact Case I ((k - 1/2) pi / n, k = 1..n) or Case II (k pi / n, k = 1..n-1) patterns."""
    out: Dict[int, NDArray[np.float64]] = {}
    for n in levels:
        if case is NodalCase.CASE_I:
            out[n] = (np.arange(1, n + 1) - 0.5) * PI / n
        elif case is NodalCase.CASE_II:
            out[n] = np.arange(1, n) * PI / n
        else:
            raise DomainError(f"no synthetic pattern for case {case}")
    return NodalSet(levels=out, case_tag=case, source=NodalSource.SYNTHETIC)


# -----------------------------
# Operations
# -----------------------------
def grid_lengths(X: NodalSet, n: int) -> NDArray[np.float64]:
    """L_k^n = X_{k+1}^n - X_k^n."""
    nodes = X.level(n)
    if nodes.size < 2:
        raise InsufficientDataError(f"level n={n} has {nodes.size} node(s); grid lengths need two")
    return np.diff(nodes)


def locate_indices(nodes: NDArray[np.float64], x) -> NDArray[np.int64]:
    """Vectorized j(x): the number of nodes at or below x (virtual X_0 = 0)."""
    return np.searchsorted(nodes, np.asarray(x, dtype=float), side="right")


def locate_index(X: NodalSet, n: int, x: float) -> int:
    """Largest j with X_j^n <= x; 0 when x precedes the first node."""
    if not (0.0 <= x <= PI):
        raise DomainError(f"x={x!r} lies outside [0, pi]")
    return int(locate_indices(X.level(n), x))


def difference_quotient(a: Sequence[float], m: int) -> NDArray[np.float64]:
    """
    delta a_j = (a_{j+1} - a_j) / a_j and
    delta^m a_j = (delta^{m-1} a_{j+1} - delta^{m-1} a_j) / a_j.

    The divisor at every order is the base sequence a_j.
    """
    base = np.asarray(a, dtype=float)
    if m < 1:
        raise DomainError(f"order m must be >= 1, got {m}")
    if base.size <= m:
        raise InsufficientDataError(f"sequence of length {base.size} is too short for delta^{m}")
    divisors = base[: base.size - 1]
    zero = np.flatnonzero(divisors == 0.0)
    if zero.size:
        raise DifferenceQuotientZeroDivision(int(zero[0]) + 1)

    current = base
    for _ in range(m):
        width = current.size - 1
        current = (current[1:] - current[:-1]) / base[:width]
    return current
