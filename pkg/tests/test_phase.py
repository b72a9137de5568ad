import math

import numpy as np
import pytest

from domain.errors import DomainError
from domain.functions import PI, RealFunction
from domain.phase import eigenfunction_samples, find_nodes, initial_phase, integrate_phase, interior_crossings
from domain.problem import BoundaryCase, PencilProblem


def test_free_phase_advances_at_rate_lambda(trivial):
    trace = integrate_phase(trivial, 4.0)
    assert trace.theta_end - trace.theta_start == pytest.approx(4 * PI, abs=1e-9)


def test_constant_coefficients_reduce_to_effective_wavenumber(constant):
    lam = 0.3 + math.sqrt(26.29)
    trace = integrate_phase(constant, lam)
    assert trace.theta_end - trace.theta_start == pytest.approx(5 * PI, abs=1e-8)


def test_robin_start_encodes_h():
    problem = PencilProblem(h=1.0)
    assert initial_phase(problem, 10.0) == pytest.approx(math.atan(10.0))


def test_solution_convention_flips_the_start():
    boundary = PencilProblem(h=1.0)
    solution = PencilProblem(h=1.0, h_convention="solution")
    assert initial_phase(solution, 10.0) == pytest.approx(PI - initial_phase(boundary, 10.0))


def test_dirichlet_start_is_zero_phase(dirichlet_trivial):
    assert integrate_phase(dirichlet_trivial, 3.5).theta_start == 0.0


def test_nodes_of_cos_4x(trivial):
    expected = (np.arange(1, 5) - 0.5) * PI / 4
    np.testing.assert_allclose(find_nodes(trivial, 4.0), expected, atol=1e-10)


def test_nodes_of_constant_case(constant):
    lam = 0.3 + math.sqrt(0.09 + 1.2 + 25.0)
    np.testing.assert_allclose(find_nodes(constant, lam), (np.arange(1, 6) - 0.5) * PI / 5, atol=1e-10)


def test_nodes_of_sin_lambda_x(dirichlet_trivial):
    lam = 4.5
    np.testing.assert_allclose(find_nodes(dirichlet_trivial, lam), np.arange(1, 5) * PI / lam, atol=1e-10)


def test_eigenfunction_samples_are_cosines(trivial):
    grid = np.linspace(0.0, PI, 101)
    np.testing.assert_allclose(eigenfunction_samples(trivial, 3.0, grid), np.cos(3.0 * grid), atol=1e-9)


def test_eigenfunction_samples_dirichlet_normalization(trivial):
    grid = np.linspace(0.0, PI, 101)
    psi = eigenfunction_samples(trivial, 3.0, grid, BoundaryCase.DIRICHLET_INIT)
    np.testing.assert_allclose(psi, np.sin(3.0 * grid) / 3.0, atol=1e-9)


def test_interior_crossings_counts_strictly_inside():
    assert interior_crossings(0.5 * PI, 4.5 * PI) == 4
    assert interior_crossings(0.0, 2.5 * PI) == 2


@pytest.mark.parametrize("lam", [0.0, -1.0, math.inf])
def test_integrate_phase_rejects_bad_lambda(lam):
    with pytest.raises(DomainError):
        integrate_phase(PencilProblem(q=RealFunction.constant(1.0)), lam)
