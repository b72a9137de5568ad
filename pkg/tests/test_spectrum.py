import math
import pickle
from concurrent.futures import ProcessPoolExecutor

import pytest

from application.container import get_bundled_problem
from domain.errors import (
    CertificationError,
    DomainError,
    InconsistencyError,
    MissingLevelError,
    SolverNonconvergenceError,
)
from domain.phase import miss_distance
from domain.spectrum import (
    Spectrum,
    SpectrumEntry,
    compute_spectrum,
    find_eigenvalue,
    l2_norm,
    orthogonality_defect,
    solve_level,
)


def closed_form(n, p0=0.3, q0=1.2):
    return p0 + math.sqrt(p0 * p0 + q0 + n * n)


def test_trivial_eigenvalue(trivial):
    lam, residual = find_eigenvalue(trivial, 7)
    assert lam == pytest.approx(7.0, abs=1e-8)
    assert residual <= 1e-10


def test_constant_eigenvalue(constant):
    lam, _ = find_eigenvalue(constant, 5)
    assert lam == pytest.approx(closed_form(5), abs=1e-8)


def test_dirichlet_eigenvalue_against_scan(dirichlet_trivial):
    lam, _ = find_eigenvalue(dirichlet_trivial, 3)
    # psi = sin(lambda x) / lambda with psi'(pi) = 0
    assert lam == pytest.approx(3.5, abs=1e-8)
    assert miss_distance(dirichlet_trivial, lam - 1e-4, 3) < 0.0 < miss_distance(dirichlet_trivial, lam + 1e-4, 3)


def test_solve_level_certifies_node_count(smooth):
    level = solve_level(smooth, 6)
    assert level.entry.node_count == 6
    assert level.nodes.size == 6


def test_solve_level_rejects_index_zero(trivial):
    with pytest.raises(DomainError):
        solve_level(trivial, 0)


def test_compute_spectrum_trivial(trivial):
    spectrum = compute_spectrum(trivial, 10)
    assert spectrum.indices == list(range(1, 11))
    for n, lam in spectrum.as_dict().items():
        assert lam == pytest.approx(n, abs=1e-8)


def test_compute_spectrum_constant(constant):
    spectrum = compute_spectrum(constant, 10)
    for n, lam in spectrum.as_dict().items():
        assert lam == pytest.approx(closed_form(n), abs=1e-8)


def test_compute_spectrum_on_a_pool_matches_serial(smooth):
    serial = compute_spectrum(smooth, 6)
    with ProcessPoolExecutor(max_workers=2) as pool:
        pooled = compute_spectrum(smooth, 6, mapper=pool.map)
    assert pooled == serial


def test_spectrum_rejects_duplicates():
    e = SpectrumEntry(n=1, lam=1.0, residual=0.0, node_count=1)
    with pytest.raises(InconsistencyError):
        Spectrum(entries=(e, e), problem_digest="x")


def test_spectrum_rejects_large_residual():
    with pytest.raises(InconsistencyError):
        Spectrum(entries=(SpectrumEntry(n=1, lam=1.0, residual=1e-3, node_count=1),), problem_digest="x")


def test_missing_level_is_a_key_error(trivial):
    spectrum = compute_spectrum(trivial, 3)
    with pytest.raises(KeyError):
        spectrum.lambda_of(9)
    with pytest.raises(MissingLevelError):
        spectrum.lambda_of(9)


def test_certification_error_survives_pickling():
    err = pickle.loads(pickle.dumps(CertificationError(4, 3, 4.2)))
    assert isinstance(err, CertificationError)
    assert (err.n, err.node_count) == (4, 3)
    assert "n=4" in str(err)


# -----------------------------
# Orthogonality
# -----------------------------
def test_orthogonality_trivial(trivial):
    spectrum = compute_spectrum(trivial, 5)
    assert orthogonality_defect(trivial, spectrum, 2, 5) <= 1e-9


def test_orthogonality_constant(constant):
    spectrum = compute_spectrum(constant, 3)
    assert orthogonality_defect(constant, spectrum, 1, 3) <= 1e-8


def test_orthogonality_smooth(smooth):
    spectrum = compute_spectrum(smooth, 9, n_min=4, indices=[4, 9])
    bound = 1e-6 * l2_norm(smooth, spectrum.lambda_of(4)) * l2_norm(smooth, spectrum.lambda_of(9))
    assert orthogonality_defect(smooth, spectrum, 4, 9) <= bound


def test_orthogonality_needs_two_indices(trivial):
    spectrum = compute_spectrum(trivial, 2)
    with pytest.raises(DomainError):
        orthogonality_defect(trivial, spectrum, 2, 2)


@pytest.mark.slow
def test_eigenvalue_remainders_shrink_for_sin_3x():
    from domain.asymptotics import compute_c0_c1, eigenvalue_remainders

    problem = get_bundled_problem("sin3")
    spectrum = compute_spectrum(problem, 40, n_min=20)
    rem = dict(eigenvalue_remainders(spectrum.as_dict(), compute_c0_c1(problem)))
    early = sorted(rem[n] for n in range(20, 25))[2]
    late = sorted(rem[n] for n in range(36, 41))[2]
    assert late <= early


def test_steep_ramp_spectrum_is_certified():
    spectrum = compute_spectrum(get_bundled_problem("steep_ramp"), 12)
    assert spectrum.indices == list(range(1, 13))
    assert all(e.node_count == e.n for e in spectrum.entries)
    assert all(e.residual <= 1e-10 for e in spectrum.entries)


def test_root_finder_failure_is_reported_as_nonconvergence(trivial, monkeypatch):
    import domain.spectrum as spectrum_module

    def failing_brentq(*args, **kwargs):
        raise ValueError("f(a) and f(b) must have different signs")

    monkeypatch.setattr(spectrum_module, "brentq", failing_brentq)
    with pytest.raises(SolverNonconvergenceError, match="n=3"):
        solve_level(trivial, 3)
