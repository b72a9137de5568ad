import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from domain.errors import DifferenceQuotientZeroDivision, DomainError, InsufficientDataError, MissingLevelError
from domain.nodal import (
    NodalCase,
    NodalSet,
    NodalSource,
    difference_quotient,
    grid_lengths,
    locate_index,
    synthetic_nodal_set,
)

PI = math.pi


@pytest.fixture
def case_one():
    return synthetic_nodal_set(NodalCase.CASE_I, [4, 5, 6])


def test_grid_lengths_of_the_uniform_pattern(case_one):
    np.testing.assert_allclose(grid_lengths(case_one, 4), np.full(3, PI / 4), atol=1e-15)


def test_grid_lengths_need_two_nodes():
    X = NodalSet(levels={1: [1.0]})
    with pytest.raises(InsufficientDataError):
        grid_lengths(X, 1)


@pytest.mark.parametrize("x, expected", [(0.0, 0), (PI / 8, 1), (1.0, 1), (PI / 2, 2), (PI, 4)])
def test_locate_index(case_one, x, expected):
    assert locate_index(case_one, 4, x) == expected


def test_locate_index_outside_the_interval(case_one):
    with pytest.raises(DomainError):
        locate_index(case_one, 4, -0.1)


def test_difference_quotient_examples():
    np.testing.assert_array_equal(difference_quotient([1.0, 2.0, 4.0], 1), [1.0, 1.0])
    np.testing.assert_array_equal(difference_quotient([1.0, 2.0, 4.0], 2), [0.0])


def test_difference_quotient_zero_divisor():
    with pytest.raises(DifferenceQuotientZeroDivision) as info:
        difference_quotient([1.0, 0.0, 2.0], 1)
    assert info.value.index == 2
    assert isinstance(info.value, ZeroDivisionError)


@pytest.mark.parametrize("n", [64, 128])
def test_scaled_difference_quotient_approaches_the_log_derivative(n):
    # a_j = exp(x_j) on the free-problem nodes, spacing pi / n
    x = (np.arange(1, n + 1) - 0.5) * PI / n
    scaled = n * difference_quotient(np.exp(x), 1)
    np.testing.assert_allclose(scaled, PI, rtol=0.1)


def test_difference_quotient_too_short():
    with pytest.raises(InsufficientDataError):
        difference_quotient([1.0, 2.0], 2)
    with pytest.raises(DomainError):
        difference_quotient([1.0, 2.0], 0)


@given(
    c=st.floats(min_value=-1e3, max_value=1e3).filter(lambda v: abs(v) > 1e-6),
    length=st.integers(min_value=2, max_value=12),
    data=st.data(),
)
def test_difference_quotient_of_a_constant_vanishes(c, length, data):
    m = data.draw(st.integers(min_value=1, max_value=length - 1))
    assert np.all(difference_quotient([c] * length, m) == 0.0)


# -----------------------------
# NodalSet
# -----------------------------
@pytest.mark.parametrize(
    "levels",
    [
        {1: [0.0]},
        {1: [PI]},
        {2: [1.0, 0.5]},
        {0: [1.0]},
        {2: [1.0, 2.0], 3: [1.0]},
    ],
)
def test_nodal_set_validation(levels):
    with pytest.raises(DomainError):
        NodalSet(levels=levels)


def test_nodal_set_is_read_only(case_one):
    with pytest.raises(ValueError):
        case_one.level(4)[0] = 1.0


def test_missing_level(case_one):
    with pytest.raises(MissingLevelError):
        case_one.level(9)


def test_restricted_keeps_tags_and_lambdas():
    X = NodalSet(levels={2: [1.0, 2.0], 3: [0.5, 1.5, 2.5]}, lambdas={2: 2.1, 3: 3.1}, source=NodalSource.FILE)
    kept = X.restricted([3, 7])
    assert kept.indices == [3]
    assert kept.lambda_for(3) == 3.1
    assert kept.source is NodalSource.FILE


def test_lambda_falls_back_to_the_index(case_one):
    assert case_one.lambda_for(5) == 5.0


def test_synthetic_case_two_has_one_fewer_node():
    X = synthetic_nodal_set(NodalCase.CASE_II, [6])
    np.testing.assert_allclose(X.level(6), np.arange(1, 6) * PI / 6)
    assert X.case_tag is NodalCase.CASE_II
