#!/usr/bin/env python3
"""
Clamped Cubic Spline Module
Type I (clamped, homogeneous) cubic splines stored in Hermite form, and the
identities tying them to the discrete biharmonic operator.
"""
import logging
from typing import Sequence, Union

import cvxpy as cp
import numpy as np

from grid import Grid, GridFunction, HomogeneousGridFunction, inner_product_h
from operators import delta_x4, hermitian_derivative

logger = logging.getLogger(__name__)

# 3-point Gauss-Legendre on [0,1], exact for the quartic integrands below
_GAUSS_T, _GAUSS_W = np.polynomial.legendre.leggauss(3)
_GAUSS_T = 0.5 * (_GAUSS_T + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


class CubicSpline:
    """C^2 piecewise cubic with s = s' = 0 at both ends, in Hermite form"""

    def __init__(self, grid: Grid, node_values: Sequence[float], node_derivs: Sequence[float]):
        """
        Args:
            grid: Grid carrying the knots
            node_values: s(x_j), j = 0..N
            node_derivs: s'(x_j), j = 0..N
        """
        values = np.array(node_values, dtype=np.float64)
        derivs = np.array(node_derivs, dtype=np.float64)
        expected = (grid.n_intervals + 1,)
        if values.shape != expected or derivs.shape != expected:
            raise ValueError(f"Spline on {grid} needs {expected[0]} node values and derivatives")
        if values[0] != 0.0 or values[-1] != 0.0 or derivs[0] != 0.0 or derivs[-1] != 0.0:
            raise ValueError("Clamped spline must vanish with its derivative at x = 0 and x = 1")
        values.flags.writeable = False
        derivs.flags.writeable = False
        self.grid = grid
        self.node_values = values
        self.node_derivs = derivs

    # Per-interval local data: u_j, u_{j+1}, d_j, d_{j+1} for every interval
    def _pieces(self):
        v, d = self.node_values, self.node_derivs
        return v[:-1], v[1:], d[:-1], d[1:]

    def _locate(self, x) -> tuple:
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
            raise ValueError("Spline evaluation points must lie in [0, 1]")
        n = self.grid.n_intervals
        # x = 1 belongs to the last interval
        j = np.minimum(np.floor(x * n).astype(int), n - 1)
        t = x * n - j
        return j, t

    def _evaluate(self, x, order: int):
        j, t = self._locate(x)
        h = self.grid.mesh
        u0, u1, d0, d1 = (a[j] for a in self._pieces())
        if order == 0:
            h00 = 2 * t**3 - 3 * t**2 + 1
            h10 = t**3 - 2 * t**2 + t
            h01 = -2 * t**3 + 3 * t**2
            h11 = t**3 - t**2
            result = h00 * u0 + h * h10 * d0 + h01 * u1 + h * h11 * d1
        elif order == 1:
            result = ((6 * t**2 - 6 * t) * u0 + h * (3 * t**2 - 4 * t + 1) * d0
                      + (-6 * t**2 + 6 * t) * u1 + h * (3 * t**2 - 2 * t) * d1) / h
        elif order == 2:
            result = ((12 * t - 6) * u0 + h * (6 * t - 4) * d0
                      + (-12 * t + 6) * u1 + h * (6 * t - 2) * d1) / h**2
        elif order == 3:
            result = (12 * u0 + 6 * h * d0 - 12 * u1 + 6 * h * d1) / h**3 + 0 * t
        else:
            raise ValueError(f"Unsupported derivative order {order}")
        return float(result) if np.ndim(result) == 0 else result

    def eval(self, x):
        return self._evaluate(x, 0)

    def eval_d1(self, x):
        return self._evaluate(x, 1)

    def eval_d2(self, x):
        return self._evaluate(x, 2)

    def piece_third_derivatives(self) -> np.ndarray:
        """Constant s''' on each of the N intervals"""
        h = self.grid.mesh
        u0, u1, d0, d1 = self._pieces()
        return 12.0 * (u0 - u1) / h**3 + 6.0 * (d0 + d1) / h**2

    def interval_second_derivatives(self) -> tuple:
        """s'' at the left and right end of each interval, from that interval's cubic"""
        h = self.grid.mesh
        u0, u1, d0, d1 = self._pieces()
        left_end = (-6.0 * u0 - 4.0 * h * d0 + 6.0 * u1 - 2.0 * h * d1) / h**2
        right_end = (6.0 * u0 + 2.0 * h * d0 - 6.0 * u1 + 4.0 * h * d1) / h**2
        return left_end, right_end

    def one_sided_second_derivatives(self) -> tuple:
        """(s''(x_j^-), s''(x_j^+)) at the interior nodes"""
        left_end, right_end = self.interval_second_derivatives()
        return right_end[:-1], left_end[1:]

    def node_second_derivatives(self) -> np.ndarray:
        """s''(x_j) at interior nodes (mean of the one-sided limits)"""
        minus, plus = self.one_sided_second_derivatives()
        return 0.5 * (minus + plus)

    def sample(self, m: int) -> dict:
        """Values of s, s', s'' at m uniform points in [0,1]"""
        xs = np.linspace(0.0, 1.0, m)
        return {'x': xs, 's': self.eval(xs), 's_d1': self.eval_d1(xs), 's_d2': self.eval_d2(xs)}


def build_spline(u: GridFunction) -> CubicSpline:
    """
    Clamped cubic spline through homogeneous data u

    Node derivatives of the minimising spline are the Hermitian derivative, so
    the spline is the piecewise Hermite cubic on (u, u_x).
    """
    u_x = hermitian_derivative(u)
    return CubicSpline(u.grid, u.values, u_x.values)


def third_derivative_jump(s: CubicSpline, j: int) -> float:
    """s'''(x_j^+) - s'''(x_j^-) at an interior node"""
    n = s.grid.n_intervals
    if not 1 <= j <= n - 1:
        raise ValueError(f"Interior index must satisfy 1 <= j <= {n - 1}, got {j}")
    third = s.piece_third_derivatives()
    return float(third[j] - third[j - 1])


def third_derivative_jumps(s: CubicSpline) -> np.ndarray:
    """Jumps of s''' at all interior nodes"""
    return np.diff(s.piece_third_derivatives())


def _interval_energies(u: np.ndarray, d: np.ndarray, h: float) -> np.ndarray:
    du = np.diff(u)
    dd = np.diff(d)
    return dd**2 / h + (3.0 / h) * ((d[:-1] + d[1:]) - 2.0 * du / h) ** 2


def energy(u: Union[GridFunction, CubicSpline]) -> float:
    """Integral of |s_u''|^2 over [0,1] as the sum of interval energies B_j"""
    s = u if isinstance(u, CubicSpline) else build_spline(u)
    return float(np.sum(_interval_energies(s.node_values, s.node_derivs, s.grid.mesh)))


def cross_energy(u: GridFunction, v: GridFunction) -> float:
    """
    Integral of s_u'' s_v'' over [0,1]

    s'' is linear on each interval so the integrand is quadratic and the
    3-point Simpson rule per interval is exact.
    """
    if u.grid != v.grid:
        raise ValueError(f"Grid functions live on different grids: {u.grid!r} vs {v.grid!r}")
    a_u, b_u = build_spline(u).interval_second_derivatives()
    a_v, b_v = build_spline(v).interval_second_derivatives()
    m_u, m_v = 0.5 * (a_u + b_u), 0.5 * (a_v + b_v)
    h = u.grid.mesh
    return float(np.sum(h / 6.0 * (a_u * a_v + 4.0 * m_u * m_v + b_u * b_v)))


def second_derivative_at_nodes(u: GridFunction) -> np.ndarray:
    """s_u''(x_j) at interior nodes, read off the spline"""
    return build_spline(u).node_second_derivatives()


def bump_perturbed_energy(s: CubicSpline, amplitudes: Sequence[float]) -> float:
    """
    Energy of s + w where w = a_j h^2 t^2 (1-t)^2 on interval j

    w and w' vanish at every node, so s + w interpolates the same data and
    stays in H^2_0.
    """
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    n = s.grid.n_intervals
    if amplitudes.shape != (n,):
        raise ValueError(f"Need one amplitude per interval ({n}), got shape {amplitudes.shape}")
    h = s.grid.mesh
    j = np.repeat(np.arange(n), len(_GAUSS_T))
    t = np.tile(_GAUSS_T, n)
    w = np.tile(_GAUSS_W, n)
    x = np.minimum((j + t) * h, 1.0)
    # d2/dx2 of h^2 t^2 (1-t)^2 = 2 - 12 t + 12 t^2
    bump_d2 = amplitudes[j] * (2.0 - 12.0 * t + 12.0 * t**2)
    total = s.eval_d2(x) + bump_d2
    return float(h * np.sum(w * total**2))


def minimal_energy_derivatives(u: GridFunction) -> np.ndarray:
    """
    Minimise the piecewise Hermite energy over free interior node derivatives

    Values are pinned to u and the end derivatives to 0; the minimiser should
    coincide with the Hermitian derivative.

    Args:
        u: Homogeneous grid function

    Returns:
        Node derivatives d_0..d_N of the minimiser
    """
    u = u if isinstance(u, HomogeneousGridFunction) else u.to_homogeneous()
    grid = u.grid
    h = grid.mesh
    n = grid.n_intervals
    du = np.diff(u.values)

    # Beslutsvariabler
    d_free = cp.Variable(grid.size)
    d = cp.hstack([np.zeros(1), d_free, np.zeros(1)])

    # Kostnadsfunktion: sum of B_j
    dd = d[1:] - d[:-1]
    slope = d[:-1] + d[1:] - 2.0 * du / h
    cost = cp.sum_squares(dd) / h + (3.0 / h) * cp.sum_squares(slope)

    problem = cp.Problem(cp.Minimize(cost))
    problem.solve()

    if problem.status != cp.OPTIMAL:
        raise ValueError(f"Energy minimisation not solved to optimality: {problem.status}")

    logger.debug(f"Minimal energy {problem.value:.6e} on N={n}")
    return np.concatenate(([0.0], np.asarray(d_free.value).ravel(), [0.0]))


def discrete_energy(u: GridFunction) -> float:
    """(delta_x^4 u, u)_h, the discrete side of the energy identity"""
    u = u if isinstance(u, HomogeneousGridFunction) else u.to_homogeneous()
    d4 = HomogeneousGridFunction.from_interior(u.grid, delta_x4(u))
    return inner_product_h(d4, u)
