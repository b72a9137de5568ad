import pickle

import pytest

from domain.errors import (
    CertificationError,
    ConfigError,
    DifferenceQuotientZeroDivision,
    DomainError,
    MissingLevelError,
    SolverNonconvergenceError,
    with_index,
)


@pytest.mark.parametrize(
    "exc",
    [
        ConfigError("run.n_min", "must be >= 1"),
        MissingLevelError(7),
        DifferenceQuotientZeroDivision(3),
        CertificationError(5, 4, 5.1),
        DomainError("x outside [0, pi]"),
    ],
)
def test_errors_survive_pickling(exc):
    back = pickle.loads(pickle.dumps(exc))
    assert type(back) is type(exc)
    assert str(back) == str(exc)
    assert back.__dict__ == exc.__dict__


def test_domain_error_is_a_value_error():
    assert issubclass(DomainError, ValueError)


def test_with_index_prefixes_once():
    exc = with_index(SolverNonconvergenceError("bracket failed"), 12)
    assert str(exc) == "n=12: bracket failed"
    assert str(with_index(exc, 12)) == "n=12: bracket failed"
    assert isinstance(exc, SolverNonconvergenceError)


def test_with_index_keeps_messages_without_an_index():
    exc = SolverNonconvergenceError("bracket failed")
    assert with_index(exc, None) is exc
    assert str(exc) == "bracket failed"
