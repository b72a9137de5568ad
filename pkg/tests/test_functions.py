import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domain.errors import DomainError
from domain.functions import (
    PI,
    RealFunction,
    evaluate,
    integrate,
    integrate_osc,
    interval_means,
    l1_distance,
)

_coef = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


@st.composite
def real_functions(draw):
    cos_terms = draw(st.lists(st.tuples(st.integers(0, 5), _coef), max_size=3))
    sin_terms = draw(st.lists(st.tuples(st.integers(1, 5), _coef), max_size=3))
    poly_terms = draw(st.lists(st.tuples(st.integers(0, 3), _coef), max_size=2))
    return RealFunction(cos_terms=tuple(cos_terms), sin_terms=tuple(sin_terms), poly_terms=tuple(poly_terms))


# -----------------------------
# evaluate
# -----------------------------
def test_evaluate_zero_function():
    assert evaluate(RealFunction.zero(), 1.0) == 0.0


def test_evaluate_derivative_of_cos_2x_at_zero():
    f = RealFunction(cos_terms=((2, 1.0),))
    assert evaluate(f, 0.0, m=1) == pytest.approx(0.0, abs=1e-12)


def test_evaluate_constant():
    assert evaluate(RealFunction.constant(0.3), PI / 2) == pytest.approx(0.3)


def test_evaluate_rejects_points_outside_interval():
    with pytest.raises(DomainError):
        evaluate(RealFunction.zero(), 3.5)


def test_cos_zero_frequency_folds_into_constant():
    assert RealFunction(cos_terms=((0, 1.5),)) == RealFunction.constant(1.5)


def test_from_mapping_rejects_unknown_keys():
    with pytest.raises(DomainError):
        RealFunction.from_mapping({"tan": [[1, 1.0]]})


def test_from_mapping_rejects_fractional_frequency():
    with pytest.raises(DomainError):
        RealFunction.from_mapping({"sin": [[1.5, 1.0]]})


@settings(max_examples=50, deadline=None)
@given(f=real_functions(), x=st.floats(min_value=0.1, max_value=3.0))
def test_derivative_matches_central_difference(f, x):
    step = 1e-5
    numeric = (f(x + step) - f(x - step)) / (2 * step)
    assert f(x, 1) == pytest.approx(numeric, abs=1e-5)


# -----------------------------
# Quadrature
# -----------------------------
def test_integrate_one():
    assert integrate(lambda t: np.ones_like(t), 0.0, PI) == pytest.approx(PI, rel=1e-14)


def test_integrate_full_periods_of_cos_2x():
    assert integrate(lambda t: np.cos(2 * t), 0.0, PI) == pytest.approx(0.0, abs=1e-13)


def test_integrate_sin_3x_squared():
    assert integrate(lambda t: np.sin(3 * t) ** 2, 0.0, PI) == pytest.approx(PI / 2, rel=1e-13)


def test_integrate_rejects_reversed_bounds():
    with pytest.raises(DomainError):
        integrate(lambda t: t, 2.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(f=real_functions(), a=st.floats(0.0, 1.0), b=st.floats(1.0, 2.0), c=st.floats(2.0, PI))
def test_integrate_is_additive(f, a, b, c):
    whole = integrate(f, a, c)
    parts = integrate(f, a, b) + integrate(f, b, c)
    assert whole == pytest.approx(parts, abs=1e-9)


def test_integrate_osc_full_periods():
    assert integrate_osc(lambda t: np.ones_like(t), 8.0, "cos", 0.0, PI) == pytest.approx(0.0, abs=1e-12)


def test_integrate_osc_zero_frequency():
    assert integrate_osc(lambda t: np.ones_like(t), 0.0, "cos", 0.0, PI) == pytest.approx(PI)


def test_integrate_osc_by_parts_oracle():
    assert integrate_osc(lambda t: t, 50.0, "sin", 0.0, PI) == pytest.approx(-PI / 50, rel=1e-10)


def test_integrate_osc_rejects_unknown_phase():
    with pytest.raises(DomainError):
        integrate_osc(lambda t: t, 1.0, "tan", 0.0, PI)


def test_interval_means_of_linear_function():
    edges = np.array([0.0, 1.0, 3.0])
    np.testing.assert_allclose(interval_means(lambda t: t, edges), [0.5, 2.0])


# -----------------------------
# l1_distance
# -----------------------------
def test_l1_distance_of_equal_functions():
    f = RealFunction(sin_terms=((3, 1.0),))
    assert l1_distance(f, f) == 0.0


def test_l1_distance_of_sin_to_zero():
    assert l1_distance(RealFunction(sin_terms=((1, 1.0),)), RealFunction.zero()) == pytest.approx(2.0, rel=1e-12)


def test_l1_distance_of_derivative_splits_at_sign_change():
    f = RealFunction(sin_terms=((1, 1.0),))
    assert l1_distance(f, RealFunction.zero(), m=1) == pytest.approx(2.0, rel=1e-12)


def test_l1_distance_cos_perturbation():
    q = RealFunction(sin_terms=((3, 1.0),))
    qbar = q + RealFunction(cos_terms=((1, 0.2),))
    assert l1_distance(q, qbar) == pytest.approx(0.4, rel=1e-12)
    assert math.isclose(l1_distance(q, qbar), l1_distance(qbar, q), rel_tol=1e-14)


@settings(max_examples=40, deadline=None)
@given(f=real_functions(), g=real_functions(), h=real_functions())
def test_l1_distance_is_symmetric_and_subadditive(f, g, h):
    fg, gh, fh = l1_distance(f, g), l1_distance(g, h), l1_distance(f, h)
    assert fg == pytest.approx(l1_distance(g, f), abs=1e-10)
    assert fh <= fg + gh + 1e-10
