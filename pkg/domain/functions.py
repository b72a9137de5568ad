from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Literal, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from config.tolerances import DEFAULT_PANELS, GAUSS_ORDER, PANELS_PER_PERIOD, SIGN_SCAN_POINTS
from domain.errors import DomainError

ArrayLike = Union[float, NDArray[np.float64]]
Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]
Phase = Literal["cos", "sin"]

PI = math.pi
_EDGE_SLACK = 1e-12


def _sorted_terms(terms) -> Tuple[Tuple[int, float], ...]:
    merged: Dict[int, float] = {}
    for k, c in terms:
        merged[int(k)] = merged.get(int(k), 0.0) + float(c)
    return tuple(sorted((k, c) for k, c in merged.items() if c != 0.0))


@dataclass(frozen=True)
class RealFunction:
    """
    f(x) = sum a_k cos(kx) + sum b_k sin(kx) + sum c_d x^d on [0, pi].

    Derivatives of every order are exact (term-wise). Coefficient lists are
    stored merged by frequency/degree and sorted, so equal functions compare equal.
    """

    cos_terms: Tuple[Tuple[int, float], ...] = field(default=())
    sin_terms: Tuple[Tuple[int, float], ...] = field(default=())
    poly_terms: Tuple[Tuple[int, float], ...] = field(default=())

    def __post_init__(self) -> None:
        cos_terms = _sorted_terms(self.cos_terms)
        sin_terms = _sorted_terms(self.sin_terms)
        poly_terms = _sorted_terms(self.poly_terms)
        if any(k < 0 for k, _ in cos_terms):
            raise DomainError("cos frequencies must be >= 0")
        if any(k < 1 for k, _ in sin_terms):
            raise DomainError("sin frequencies must be >= 1")
        if any(d < 0 for d, _ in poly_terms):
            raise DomainError("polynomial degrees must be >= 0")
        for _, c in cos_terms + sin_terms + poly_terms:
            if not math.isfinite(c):
                raise DomainError("coefficients must be finite")
        # cos(0x) is a constant: keep it with the polynomial part
        const = sum(c for k, c in cos_terms if k == 0)
        if const:
            cos_terms = tuple((k, c) for k, c in cos_terms if k != 0)
            poly_terms = _sorted_terms(poly_terms + ((0, const),))
        object.__setattr__(self, "cos_terms", cos_terms)
        object.__setattr__(self, "sin_terms", sin_terms)
        object.__setattr__(self, "poly_terms", poly_terms)

    # -----------------------------
    # Constructors
    # -----------------------------
    @classmethod
    def zero(cls) -> "RealFunction":
        return cls()

    @classmethod
    def constant(cls, value: float) -> "RealFunction":
        return cls(poly_terms=((0, value),))

    @classmethod
    def from_mapping(cls, data: Dict[str, List[List[float]]]) -> "RealFunction":
        """Build from the `cos` / `sin` / `poly` key-value block."""
        unknown = set(data) - {"cos", "sin", "poly"}
        if unknown:
            raise DomainError(f"unknown potential keys: {', '.join(sorted(unknown))}")

        def _pairs(key: str):
            out = []
            for pair in data.get(key, []):
                if len(pair) != 2:
                    raise DomainError(f"{key} entries must be [index, coefficient] pairs")
                idx, coef = pair
                if float(idx) != int(idx):
                    raise DomainError(f"{key} index must be an integer, got {idx}")
                out.append((int(idx), float(coef)))
            return tuple(out)

        return cls(cos_terms=_pairs("cos"), sin_terms=_pairs("sin"), poly_terms=_pairs("poly"))

    def as_mapping(self) -> Dict[str, List[List[float]]]:
        return {
            "cos": [[k, a] for k, a in self.cos_terms],
            "sin": [[k, b] for k, b in self.sin_terms],
            "poly": [[d, c] for d, c in self.poly_terms],
        }

    # -----------------------------
    # Algebra
    # -----------------------------
    def __add__(self, other: "RealFunction") -> "RealFunction":
        return RealFunction(
            cos_terms=self.cos_terms + other.cos_terms,
            sin_terms=self.sin_terms + other.sin_terms,
            poly_terms=self.poly_terms + other.poly_terms,
        )

    def scaled(self, factor: float) -> "RealFunction":
        return RealFunction(
            cos_terms=tuple((k, factor * a) for k, a in self.cos_terms),
            sin_terms=tuple((k, factor * b) for k, b in self.sin_terms),
            poly_terms=tuple((d, factor * c) for d, c in self.poly_terms),
        )

    def __sub__(self, other: "RealFunction") -> "RealFunction":
        return self + other.scaled(-1.0)

    @property
    def is_zero(self) -> bool:
        return not (self.cos_terms or self.sin_terms or self.poly_terms)

    # -----------------------------
    # Evaluation
    # -----------------------------
    def __call__(self, x: ArrayLike, m: int = 0) -> ArrayLike:
        """Vectorized m-th derivative; no domain check (see `evaluate`)."""
        if m < 0:
            raise DomainError(f"derivative order must be >= 0, got {m}")
        xs = np.asarray(x, dtype=float)
        out = np.zeros_like(xs)
        shift = m * PI / 2.0
        for k, a in self.cos_terms:
            out = out + a * float(k) ** m * np.cos(k * xs + shift)
        for k, b in self.sin_terms:
            out = out + b * float(k) ** m * np.sin(k * xs + shift)
        for d, c in self.poly_terms:
            if m > d:
                continue
            falling = math.perm(d, m)
            out = out + c * falling * xs ** (d - m)
        return float(out) if out.ndim == 0 else out

    def scalar(self, m: int = 0) -> Callable[[float], float]:
        """Plain-float evaluator of f^(m) for tight loops such as ODE right-hand sides."""
        shift = m * PI / 2.0
        cos_t = [(k, a * float(k) ** m) for k, a in self.cos_terms]
        sin_t = [(k, b * float(k) ** m) for k, b in self.sin_terms]
        poly_t = [(d - m, c * math.perm(d, m)) for d, c in self.poly_terms if d >= m]

        def value(x: float) -> float:
            total = 0.0
            for k, a in cos_t:
                total += a * math.cos(k * x + shift)
            for k, b in sin_t:
                total += b * math.sin(k * x + shift)
            for d, c in poly_t:
                total += c * x**d
            return total

        return value

    def sup_norm(self, m: int = 0) -> float:
        """Upper bound of |f^(m)| on [0, pi] from the coefficients."""
        bound = sum(abs(a) * float(k) ** m for k, a in self.cos_terms)
        bound += sum(abs(b) * float(k) ** m for k, b in self.sin_terms)
        for d, c in self.poly_terms:
            if m <= d:
                bound += abs(c) * math.perm(d, m) * PI ** (d - m)
        return bound


def _check_point(x: float) -> None:
    if not (-_EDGE_SLACK <= x <= PI + _EDGE_SLACK) or not math.isfinite(x):
        raise DomainError(f"x={x!r} lies outside [0, pi]")


def _check_bounds(a: float, b: float) -> None:
    _check_point(a)
    _check_point(b)
    if a > b:
        raise DomainError(f"integration bounds reversed: a={a!r} > b={b!r}")


def evaluate(f: RealFunction, x: float, m: int = 0) -> float:
    """m-th derivative of f at a single point of [0, pi]."""
    _check_point(x)
    return float(f(x, m))


# -----------------------------
# Quadrature
# -----------------------------
@lru_cache(maxsize=8)
def _gauss_rule(order: int) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def _composite(f: Integrand, a: float, b: float, panels: int) -> float:
    if b == a:
        return 0.0
    nodes, weights = _gauss_rule(GAUSS_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.asarray(f(xs), dtype=float).reshape(panels, GAUSS_ORDER)
    return float(np.sum(half * (vals @ weights)))


def integrate(f: Integrand, a: float, b: float, panels: int = DEFAULT_PANELS) -> float:
    """Composite Gauss-Legendre quadrature of a vectorized integrand on [a, b]."""
    _check_bounds(a, b)
    return _composite(f, a, b, panels)


def oscillatory_panels(omega: float, a: float, b: float) -> int:
    return int(math.ceil(max(1.0, omega * (b - a) / (2.0 * PI)) * PANELS_PER_PERIOD))


def integrate_osc(f: Integrand, omega: float, phase: Phase, a: float, b: float) -> float:
    """Integral of f(t)*cos(omega t) (or sin) with panels scaled to the frequency."""
    _check_bounds(a, b)
    if omega < 0:
        raise DomainError(f"omega must be >= 0, got {omega}")
    if phase not in ("cos", "sin"):
        raise DomainError(f"phase must be 'cos' or 'sin', got {phase!r}")
    carrier = np.cos if phase == "cos" else np.sin

    def integrand(t):
        return np.asarray(f(t), dtype=float) * carrier(omega * t)

    return _composite(integrand, a, b, oscillatory_panels(omega, a, b))


def sign_change_points(d: Integrand, a: float, b: float, scan: int = SIGN_SCAN_POINTS) -> List[float]:
    """Roots of d on [a, b] located by a uniform scan and refined by bracketing."""
    xs = np.linspace(a, b, scan)
    vals = np.asarray(d(xs), dtype=float)
    roots: List[float] = []
    for i in range(scan - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            if 0 < i:
                roots.append(float(xs[i]))
            continue
        if v0 * v1 < 0.0:
            roots.append(float(brentq(lambda t: float(d(np.asarray(t))), xs[i], xs[i + 1], xtol=1e-15)))
    return roots


def l1_distance(f: RealFunction, g: RealFunction, m: int = 0, a: float = 0.0, b: float = PI) -> float:
    """Integral of |f^(m) - g^(m)| over [a, b], split at sign changes."""
    _check_bounds(a, b)
    diff = f - g
    if diff.is_zero or a == b:
        return 0.0

    def d(x):
        return diff(x, m)

    cuts = [a] + sign_change_points(d, a, b) + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo:
            total += abs(_composite(d, lo, hi, DEFAULT_PANELS))
    return total


def interval_means(f: Integrand, edges: NDArray[np.float64]) -> NDArray[np.float64]:
    """Mean of f over each [edges[i], edges[i+1]] by one Gauss-Legendre panel per interval."""
    edges = np.asarray(edges, dtype=float)
    nodes, weights = _gauss_rule(GAUSS_ORDER)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    xs = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(f(xs.ravel()), dtype=float).reshape(xs.shape)
    return 0.5 * (vals @ weights)
