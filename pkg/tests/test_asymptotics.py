import math

import numpy as np
import pytest

from application.container import get_bundled_problem
from application.pipeline import solve_problem
from domain.asymptotics import (
    NodalAsymptotics,
    classify_case,
    compute_c0_c1,
    eigenvalue_remainders,
    exact_free_nodes,
    free_robin_eigenvalue,
    lambda_asymptotic,
    nodes_asymptotic,
)
from domain.errors import DomainError, InsufficientDataError
from domain.nodal import NodalCase, synthetic_nodal_set
from domain.phase import find_nodes
from domain.problem import BoundaryCase, PencilProblem
from domain.spectrum import find_eigenvalue

PI = math.pi


# -----------------------------
# c0 / c1
# -----------------------------
def test_free_problem_has_no_shift(trivial):
    asym = compute_c0_c1(trivial)
    assert (asym.c0, asym.c1) == pytest.approx((0.0, 0.0), abs=1e-14)


def test_constant_coefficients(constant):
    asym = compute_c0_c1(constant)
    assert asym.c0 == pytest.approx(0.3, abs=1e-12)
    assert asym.c1 == pytest.approx(0.645, abs=1e-12)


def test_boundary_parameters_enter_c1():
    asym = compute_c0_c1(PencilProblem(h=2.0, H=1.0))
    assert asym.c1 == pytest.approx(3.0 / PI, abs=1e-14)


def test_dirichlet_start_drops_h():
    asym = compute_c0_c1(PencilProblem(h=2.0, H=1.0, case=BoundaryCase.DIRICHLET_INIT))
    assert asym.c1 == pytest.approx(1.0 / PI, abs=1e-14)
    assert asym.offset == 0.5


# -----------------------------
# Eigenvalue asymptotics
# -----------------------------
def test_lambda_asymptotic_examples(constant):
    assert lambda_asymptotic(10, NodalAsymptotics(0.0, 0.0)) == 10.0
    assert lambda_asymptotic(5, compute_c0_c1(constant)) == pytest.approx(5.429, abs=1e-12)


def test_lambda_asymptotic_is_close_for_large_n(constant):
    exact = 0.3 + math.sqrt(0.09 + 1.2 + 100.0**2)
    assert abs(exact - lambda_asymptotic(100, compute_c0_c1(constant))) <= 5e-5


def test_lambda_asymptotic_rejects_index_zero():
    with pytest.raises(DomainError):
        lambda_asymptotic(0, NodalAsymptotics(0.0, 0.0))


def test_remainders_are_scaled_by_n():
    rows = eigenvalue_remainders({4: 4.5, 2: 2.25}, NodalAsymptotics(0.0, 0.0))
    assert rows == [(2, 0.5), (4, 2.0)]


# -----------------------------
# Node asymptotics
# -----------------------------
def test_free_nodes_are_exact(trivial):
    nodes, lengths = nodes_asymptotic(trivial, 6.0, 6)
    np.testing.assert_allclose(nodes, (np.arange(1, 7) - 0.5) * PI / 6.0, atol=1e-14)
    np.testing.assert_allclose(lengths, np.full(5, PI / 6.0), atol=1e-14)


def test_node_asymptotics_against_the_solver():
    problem = get_bundled_problem("sin3")
    n = 30
    lam, _ = find_eigenvalue(problem, n)
    approx, _ = nodes_asymptotic(problem, lam, n)
    assert float(np.max(np.abs(approx - find_nodes(problem, lam)))) <= 2.0 / n**2


def test_node_asymptotics_rejects_unknown_shift(trivial):
    with pytest.raises(DomainError):
        nodes_asymptotic(trivial, 4.0, 4, h_shift="other")


# -----------------------------
# Free Robin oracle
# -----------------------------
@pytest.mark.parametrize("n", [1, 4, 12])
def test_free_oracle_matches_the_solver(n):
    problem = get_bundled_problem("h_oracle")
    lam, _ = find_eigenvalue(problem, n)
    assert free_robin_eigenvalue(0.5, 0.0, n) == pytest.approx(lam, abs=1e-9)
    np.testing.assert_allclose(exact_free_nodes(0.5, lam), find_nodes(problem, lam), atol=1e-9)


# -----------------------------
# Classification
# -----------------------------
def test_classify_synthetic_patterns():
    levels = range(8, 25)
    assert classify_case(synthetic_nodal_set(NodalCase.CASE_I, levels)) is NodalCase.CASE_I
    assert classify_case(synthetic_nodal_set(NodalCase.CASE_II, levels)) is NodalCase.CASE_II


def test_classify_solver_sets(trivial_solved, dirichlet_trivial):
    assert classify_case(trivial_solved.nodes.tagged(NodalCase.UNKNOWN)) is NodalCase.CASE_I
    dirichlet = solve_problem(dirichlet_trivial, range(8, 25))
    assert classify_case(dirichlet.nodes.tagged(NodalCase.UNKNOWN)) is NodalCase.CASE_II


def test_classify_needs_enough_levels():
    with pytest.raises(InsufficientDataError):
        classify_case(synthetic_nodal_set(NodalCase.CASE_I, [8, 9, 10]))
