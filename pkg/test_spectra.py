#!/usr/bin/env python3
"""
Tests for continuous and discrete spectra, traces and convergence diagnostics
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from grid import make_grid
from kernel import assemble_kernel_matrix, kernel_K_vectorized
from operators import assemble_dbo_matrix
from spectra import (BracketError, DegenerateModeError, JacobiConvergenceError, continuous_spectrum,
                     convergence_study, discrete_spectrum, distance_bound_study, eigenfunction, fit_slope,
                     hs_inequality_check, jacobi_eigh, monotonicity_observation, power_iteration,
                     rayleigh_check, trace_gamma, trace_gamma_h, trace_gamma_h_closed_form)

TRUE_EIGENVALUES = [500.563902, 3803.537080, 14617.630131, 39943.799006]

# Published discrete eigenvalues, k = 1..4, with two misprints corrected:
# N=30, k=4 is printed 39940.722654 and N=20, k=3 is printed 14615.468848.
TABLE = {
    10: [500.521885, 3800.689969, 14567.617771, 39493.816015],
    20: [500.561614, 3803.398598, 14615.468485, 39926.599754],
    30: [500.563462, 3803.511145, 14617.236978, 39940.772654],
    40: [500.563764, 3803.529031, 14617.509451, 39942.881883],
    50: [500.563845, 3803.533813, 14617.581402, 39943.430972],
    60: [500.563874, 3803.535512, 14617.606815, 39943.623511],
}


@pytest.fixture(scope='module')
def table_spectra():
    return {n: discrete_spectrum(make_grid(n)) for n in TABLE}


def test_first_eigenvalue():
    assert continuous_spectrum(1).lambda_(1) == pytest.approx(500.5639017404, abs=1e-6)


def test_true_eigenvalue_row():
    spectrum = continuous_spectrum(4)
    np.testing.assert_allclose(spectrum.lambdas, TRUE_EIGENVALUES, rtol=0, atol=1e-4)


def test_roots_in_brackets_with_small_residual():
    spectrum = continuous_spectrum(60)
    assert np.all(spectrum.in_brackets())
    assert np.all(np.abs(spectrum.residuals) <= 1e-12)
    assert np.all(np.diff(spectrum.betas) > 0)
    for k in range(1, 9):
        lo, hi = spectrum.bracket(k)
        assert lo < spectrum.beta(k) < hi
    assert 1.5 * np.pi < spectrum.beta(1) < 2 * np.pi
    assert 2 * np.pi < spectrum.beta(2) < 2.5 * np.pi


def test_roots_satisfy_characteristic_equation():
    spectrum = continuous_spectrum(4)
    for beta in spectrum.betas:
        assert np.cos(beta) * np.cosh(beta) == pytest.approx(1.0, abs=1e-8)


def test_far_roots_are_anchored():
    spectrum = continuous_spectrum(240)
    assert spectrum.offsets[-1] == 0.0
    assert spectrum.beta(240) == pytest.approx(240.5 * np.pi)


def test_continuous_spectrum_needs_one_root():
    with pytest.raises(ValueError):
        continuous_spectrum(0)


def test_eigenfunction_boundary_conditions():
    for beta in continuous_spectrum(5).betas:
        for order in (0, 1):
            scale = beta ** order
            assert abs(eigenfunction(beta, 0.0, order)) <= 1e-10 * scale
            assert abs(eigenfunction(beta, 1.0, order)) <= 1e-10 * scale


def test_eigenfunction_normalised_and_orthogonal():
    t, w = np.polynomial.legendre.leggauss(64)
    x, w = 0.5 * (t + 1), 0.5 * w
    betas = continuous_spectrum(3).betas
    assert np.sum(w * eigenfunction(betas[0], x) ** 2) == pytest.approx(1.0, abs=1e-10)
    assert abs(np.sum(w * eigenfunction(betas[0], x) * eigenfunction(betas[1], x))) <= 1e-8
    assert abs(np.sum(w * eigenfunction(betas[1], x) * eigenfunction(betas[2], x))) <= 1e-8


@pytest.mark.parametrize("k", [1, 2])
def test_eigenfunction_solves_the_equation(k):
    beta = continuous_spectrum(k).beta(k)
    x = np.linspace(0.0, 1.0, 101)
    phi = eigenfunction(beta, x)
    d4 = eigenfunction(beta, x, derivative=4)
    assert np.max(np.abs(d4 - beta ** 4 * phi)) <= 1e-7 * beta ** 4 * np.max(np.abs(phi))


def test_eigenfunction_sign_convention():
    beta = continuous_spectrum(1).beta(1)
    assert eigenfunction(beta, 0.05) > 0.0
    with pytest.raises(ValueError):
        eigenfunction(beta, 0.5, derivative=-1)


def test_table_reproduction(table_spectra):
    for n, row in TABLE.items():
        computed = [table_spectra[n].lambda_h(k) for k in range(1, 5)]
        np.testing.assert_allclose(computed, row, rtol=0, atol=1e-3)


@pytest.mark.parametrize("n,k,printed", [(30, 4, 39940.722654), (20, 3, 14615.468848)])
def test_misprinted_table_entries(table_spectra, n, k, printed):
    lapack = np.linalg.eigvalsh(assemble_dbo_matrix(make_grid(n)).entries)[k - 1]
    assert table_spectra[n].lambda_h(k) == pytest.approx(lapack, rel=1e-12)
    assert table_spectra[n].lambda_h(k) == pytest.approx(TABLE[n][k - 1], abs=1e-5)
    assert abs(lapack - printed) > 1e-4


def test_error_at_n10_matches_table():
    report = convergence_study([1], [10, 20, 30])
    assert report.rows[0]['abs_error'] == pytest.approx(0.042017, abs=1e-5)


def test_discrete_spectrum_n2():
    spectrum = discrete_spectrum(make_grid(2))
    np.testing.assert_allclose(spectrum.lambdas_h, [384.0], rtol=1e-13)


def test_discrete_spectrum_properties():
    spectrum = discrete_spectrum(make_grid(16))
    assert np.all(spectrum.lambdas_h > 0)
    assert np.all(np.diff(spectrum.lambdas_h) >= 0)
    kernel = assemble_kernel_matrix(make_grid(16)).entries
    np.testing.assert_allclose(np.sort(1 / spectrum.lambdas_h), np.linalg.eigvalsh(kernel), rtol=1e-10)
    with pytest.raises(ValueError):
        spectrum.lambda_h(16)
    assert 0 < spectrum.sweeps <= 100


def test_one_sided_bound(table_spectra):
    lam_1 = continuous_spectrum(1).lambda_(1)
    for spectrum in table_spectra.values():
        assert spectrum.lambda_h(1) - lam_1 <= 1e-9


@pytest.mark.parametrize("k,n_values", [
    (1, [10, 20, 30, 40, 50, 60]),
    (2, [10, 20, 30, 40, 50, 60]),
    (3, [10, 20, 30, 40, 50, 60]),
    (4, [20, 30, 40, 50, 60]),
])
def test_optimal_rate(k, n_values):
    report = convergence_study([k], n_values)
    assert -4.3 <= report.slopes[k] <= -3.7


def test_convergence_study_rows_sorted():
    report = convergence_study([2, 1], [30, 10, 20])
    assert [(r['k'], r['N']) for r in report.rows] == [(1, 10), (1, 20), (1, 30), (2, 10), (2, 20), (2, 30)]
    assert len(report.errors(1)) == 3
    assert [r['k'] for r in report.slope_rows()] == [1, 2]


def test_convergence_study_precondition():
    with pytest.raises(ValueError):
        convergence_study([4], [5, 10, 20])
    with pytest.raises(ValueError):
        convergence_study([0], [10, 20])


def test_fit_slope():
    n = np.array([10.0, 20.0, 40.0])
    assert fit_slope(n, 3.0 * n ** -4) == pytest.approx(-4.0)
    assert np.isnan(fit_slope([10.0], [1.0]))


def test_traces():
    assert trace_gamma() == 1 / 420
    for n in range(2, 129):
        grid = make_grid(n)
        assert abs(trace_gamma_h(grid) - trace_gamma_h_closed_form(grid)) <= 1e-15
    assert trace_gamma_h(make_grid(2)) == pytest.approx(1 / 384, rel=1e-14)
    assert trace_gamma_h(make_grid(10)) - trace_gamma() == pytest.approx(1e-4 / 180 - 1e-6 / 126, rel=1e-6)


@pytest.mark.parametrize("n", [2, 8, 32])
def test_spectral_sum_is_trace(n):
    grid = make_grid(n)
    assert np.sum(1 / discrete_spectrum(grid).lambdas_h) == pytest.approx(trace_gamma_h(grid), rel=1e-12)


@settings(deadline=None)
@given(matrix=arrays(np.float64, (6, 6), elements=st.floats(min_value=-10.0, max_value=10.0)))
def test_jacobi_matches_lapack(matrix):
    symmetric = matrix + matrix.T
    values, vectors, _ = jacobi_eigh(symmetric)
    scale = max(np.linalg.norm(symmetric), 1.0)
    np.testing.assert_allclose(np.sort(values), np.linalg.eigvalsh(symmetric), rtol=0, atol=1e-10 * scale)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(6), atol=1e-10)
    np.testing.assert_allclose(symmetric @ vectors, vectors * values, atol=1e-9 * scale)


def test_jacobi_subnormal_off_diagonal():
    matrix = np.array([[0.0, 5e-324, 0.0], [5e-324, 4.0, 1.0], [0.0, 1.0, 2.0]])
    with np.errstate(over='raise', divide='raise', invalid='raise'):
        values, vectors, sweeps = jacobi_eigh(matrix)
    assert sweeps > 0
    np.testing.assert_allclose(np.sort(values), [0.0, 3.0 - np.sqrt(2.0), 3.0 + np.sqrt(2.0)], atol=1e-12)
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)


def test_jacobi_sweep_limit():
    matrix = np.array([[2.0, 1.0], [1.0, 3.0]])
    with pytest.raises(JacobiConvergenceError):
        jacobi_eigh(matrix, max_sweeps=0)


def test_jacobi_rejects_non_square():
    with pytest.raises(ValueError):
        jacobi_eigh(np.zeros((2, 3)))


def test_power_iteration_agrees_with_jacobi():
    grid = make_grid(10)
    values, _ = power_iteration(assemble_kernel_matrix(grid).entries, 3)
    np.testing.assert_allclose(values, discrete_spectrum(grid).kernel_eigenvalues[:3], rtol=1e-8)


def test_rayleigh_check():
    report = rayleigh_check(make_grid(10), k_max=2, seed=3)
    assert report['status'] == 'pass'
    assert report['first_mode_nonnegative']
    with pytest.raises(ValueError):
        rayleigh_check(make_grid(2))


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_hs_inequality(n):
    report = hs_inequality_check(make_grid(n))
    assert report['status'] == 'pass'
    assert report['tail'][0] <= report['tail'][1]
    assert report['right_over_h2'] > 0


def test_hs_inequality_negative_control():
    report = hs_inequality_check(make_grid(4), approx=kernel_K_vectorized)
    assert report['status'] == 'fail'
    assert report['right'] == 0.0


def test_hs_inequality_needs_tail():
    with pytest.raises(ValueError):
        hs_inequality_check(make_grid(4), tail_terms=10)


@pytest.fixture(scope='module')
def distance_study():
    return distance_bound_study([1, 2, 3, 4], [16, 32, 64, 128])


def test_distance_bound(distance_study):
    assert distance_study['bound'] == max(r['scaled'] for r in distance_study['rows'])
    assert len(distance_study['rows']) == 16


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_distance_bound_per_mode(distance_study, k):
    scaled = [r['scaled'] for r in distance_study['rows'] if r['k'] == k]
    assert [r['N'] for r in distance_study['rows'] if r['k'] == k] == [16, 32, 64, 128]
    assert all(value > 0.0 for value in scaled)
    assert max(scaled) / min(scaled) <= 2.0


def test_monotonicity_observed():
    assert monotonicity_observation(list(TABLE))['status'] == 'observed'


def test_error_types():
    for error in (BracketError, JacobiConvergenceError, DegenerateModeError):
        assert issubclass(error, RuntimeError)
