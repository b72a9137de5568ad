from typing import Optional


def _rebuild(cls, args, state):
    exc = cls.__new__(cls)
    exc.args = args
    exc.__dict__.update(state)
    return exc


class PencilLabError(Exception):
    """Base class for every failure raised by the lab."""

    def __reduce__(self):
        # subclasses take their own constructor arguments; rebuild from args and attributes
        return _rebuild, (self.__class__, self.args, self.__dict__)


class DomainError(PencilLabError, ValueError):
    """Argument outside [0, pi] or otherwise outside an operation's domain."""


class SolverNonconvergenceError(PencilLabError):
    pass


class CertificationError(PencilLabError):
    """A converged eigenvalue whose oscillation count does not match its index."""

    def __init__(self, n: int, node_count: int, lam: float):
        self.n = n
        self.node_count = node_count
        self.lam = lam
        super().__init__(f"n={n}: root lambda={lam:.12g} has {node_count} interior nodes")


class InconsistencyError(PencilLabError):
    pass


class MissingLevelError(PencilLabError, KeyError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"nodal set has no level n={n}")

    def __str__(self) -> str:
        return self.args[0]


class InsufficientDataError(PencilLabError):
    pass


class CaseMismatchError(PencilLabError):
    pass


class DifferenceQuotientZeroDivision(PencilLabError, ZeroDivisionError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"difference quotient divides by zero at index j={index}")


class ConfigError(PencilLabError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def with_index(exc: PencilLabError, n: Optional[int]) -> PencilLabError:
    """Prefix an error message with the spectral index, keeping its class."""
    if n is None or str(exc).startswith(f"n={n}:"):
        return exc
    exc.args = (f"n={n}: {exc}",) + tuple(exc.args[1:])
    return exc
