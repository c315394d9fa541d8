#!/usr/bin/env python3
"""
Tests for the compact difference operators and the DBO matrix
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import solve_banded

from grid import GridFunction, HomogeneousGridFunction, make_grid, sample_interior
from operators import (TridiagonalSystem, assemble_dbo_matrix, delta_tilde_x2, delta_x, delta_x2,
                       delta_x4, hermitian_derivative, simpson_apply, spline_second_derivative)


@pytest.fixture
def unit_bump():
    return HomogeneousGridFunction(make_grid(4), [0.0, 1.0, 0.0, 0.0, 0.0])


def test_central_differences(unit_bump):
    np.testing.assert_allclose(delta_x(unit_bump), [0.0, -2.0, 0.0])
    np.testing.assert_allclose(delta_x2(unit_bump), [-32.0, 16.0, 0.0])


def test_delta_x_vanishes_at_midpoint_for_symmetric_data():
    u = GridFunction(make_grid(4), [0.0, 0.1875, 0.25, 0.1875, 0.0])
    assert delta_x(u)[1] == pytest.approx(0.0, abs=1e-15)


def test_simpson_of_constant():
    u = GridFunction(make_grid(4), np.ones(5))
    np.testing.assert_allclose(simpson_apply(u), np.ones(3))


def test_hermitian_derivative_hand_values(unit_bump):
    np.testing.assert_allclose(hermitian_derivative(unit_bump).interior, [6 / 7, -24 / 7, 6 / 7], rtol=1e-14)


def test_hermitian_derivative_n2_is_zero():
    u = HomogeneousGridFunction(make_grid(2), [0.0, 3.5, 0.0])
    np.testing.assert_array_equal(hermitian_derivative(u).values, [0.0, 0.0, 0.0])


def test_dbo_hand_values(unit_bump):
    np.testing.assert_allclose(delta_x4(unit_bump), [33792 / 7, -3072.0, 9216 / 7], rtol=1e-13)


def test_delta_tilde_hand_values(unit_bump):
    np.testing.assert_allclose(delta_tilde_x2(unit_bump), [-64 + 48 / 7, 32.0, -48 / 7], rtol=1e-13)


def test_dbo_rejects_non_homogeneous():
    with pytest.raises(ValueError):
        delta_x4(GridFunction(make_grid(4), [1.0, 0.0, 0.0, 0.0, 0.0]))


def test_second_derivative_forms_agree(unit_bump):
    forms = spline_second_derivative(unit_bump)
    np.testing.assert_allclose(forms['tilde_form'], forms['plain_form'], rtol=1e-12, atol=1e-12)


def test_thomas_matches_banded_reference():
    rng = np.random.default_rng(7)
    n = 25
    system = TridiagonalSystem(rng.uniform(-1, 1, n), rng.uniform(4, 5, n), rng.uniform(-1, 1, n))
    rhs = rng.standard_normal(n)
    banded = np.zeros((3, n))
    banded[0, 1:] = system.sup[:-1]
    banded[1] = system.main
    banded[2, :-1] = system.sub[1:]
    np.testing.assert_allclose(system.solve(rhs), solve_banded((1, 1), banded, rhs), rtol=1e-12)
    assert system.is_diagonally_dominant()


def test_thomas_multiple_right_hand_sides():
    system = TridiagonalSystem.simpson(6)
    rhs = np.arange(18, dtype=float).reshape(6, 3)
    solution = system.solve(rhs)
    np.testing.assert_allclose(system.matvec(solution), rhs, atol=1e-12)
    np.testing.assert_allclose(system.to_dense() @ solution, rhs, atol=1e-12)


def test_dbo_matrix_first_column(unit_bump):
    dbo = assemble_dbo_matrix(make_grid(4))
    np.testing.assert_allclose(dbo.entries[:, 0], [33792 / 7, -3072.0, 9216 / 7], rtol=1e-13)


@pytest.mark.parametrize("n", [4, 8, 16, 32, 64])
def test_dbo_matrix_symmetric(n):
    assert assemble_dbo_matrix(make_grid(n)).symmetry_defect() <= 1e-12


def test_dbo_matrix_matches_operator_on_smooth_data():
    grid = make_grid(16)
    u = sample_interior(grid, lambda x: np.sin(np.pi * x) ** 2 * np.cos(3 * x))
    np.testing.assert_allclose(assemble_dbo_matrix(grid).matvec(u), delta_x4(u), rtol=1e-10)


def test_hermitian_residual():
    rng = np.random.default_rng(11)
    for i in range(1000):
        grid = make_grid(4 + i % 125)
        u = HomogeneousGridFunction.from_interior(grid, rng.uniform(-1.0, 1.0, grid.size))
        u_x = hermitian_derivative(u)
        lhs = TridiagonalSystem.simpson(grid.size).matvec(u_x.interior)
        rhs = delta_x(u)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs)), grid


@pytest.mark.parametrize("n", [4, 7, 16, 33, 64, 128])
def test_simpson_is_identity_plus_second_difference(n):
    grid = make_grid(n)
    rng = np.random.default_rng(n)
    for _ in range(20):
        u = HomogeneousGridFunction.from_interior(grid, rng.uniform(-1.0, 1.0, grid.size))
        expected = u.interior + grid.mesh ** 2 / 6.0 * delta_x2(u)
        assert np.max(np.abs(simpson_apply(u) - expected)) <= 1e-12 * np.max(np.abs(expected))


@settings(deadline=None)
@given(interior=arrays(np.float64, st.integers(min_value=1, max_value=30),
                       elements=st.floats(min_value=-1.0, max_value=1.0).filter(lambda t: t == 0 or abs(t) > 1e-100)))
def test_dbo_self_adjoint(interior):
    grid = make_grid(len(interior) + 1)
    rng = np.random.default_rng(len(interior))
    u = HomogeneousGridFunction.from_interior(grid, interior)
    v = HomogeneousGridFunction.from_interior(grid, rng.uniform(-1, 1, grid.size))
    uv = np.dot(delta_x4(u), v.interior)
    vu = np.dot(delta_x4(v), u.interior)
    scale = np.linalg.norm(delta_x4(u)) * np.linalg.norm(v.interior) + 1e-300
    assert abs(uv - vu) <= 1e-12 * scale
