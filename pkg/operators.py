#!/usr/bin/env python3
"""
Compact Finite-Difference Operators
Central differences, the Simpson operator, the Hermitian derivative and the
discrete biharmonic operator (DBO) on homogeneous grid functions.

All operator outputs are interior sequences (j = 1..N-1); boundary rows are
never formed.
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

from grid import Grid, GridFunction, HomogeneousGridFunction

logger = logging.getLogger(__name__)


class TridiagonalSystem:
    """Constant or variable coefficient tridiagonal matrix, solved by Thomas elimination"""

    def __init__(self, sub: Sequence[float], main: Sequence[float], sup: Sequence[float]):
        """
        Args:
            sub: Sub-diagonal, length M (sub[0] unused)
            main: Main diagonal, length M
            sup: Super-diagonal, length M (sup[M-1] unused)
        """
        self.sub = np.asarray(sub, dtype=np.float64)
        self.main = np.asarray(main, dtype=np.float64)
        self.sup = np.asarray(sup, dtype=np.float64)
        if not (self.sub.shape == self.main.shape == self.sup.shape and self.main.ndim == 1):
            raise ValueError("Diagonals must be 1-D arrays of equal length")
        self.size = len(self.main)

    @classmethod
    def simpson(cls, size: int) -> "TridiagonalSystem":
        """The Simpson operator sigma_x = (1/6, 2/3, 1/6) on `size` interior nodes"""
        return cls(np.full(size, 1.0 / 6.0), np.full(size, 2.0 / 3.0), np.full(size, 1.0 / 6.0))

    def is_diagonally_dominant(self) -> bool:
        off = np.abs(self.sub) + np.abs(self.sup)
        off[0] -= abs(self.sub[0])
        off[-1] -= abs(self.sup[-1])
        return bool(np.all(np.abs(self.main) > off))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = self.main[:, None] * x if x.ndim == 2 else self.main * x
        if x.ndim == 2:
            y[1:] += self.sub[1:, None] * x[:-1]
            y[:-1] += self.sup[:-1, None] * x[1:]
        else:
            y[1:] += self.sub[1:] * x[:-1]
            y[:-1] += self.sup[:-1] * x[1:]
        return y

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.main) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """
        Thomas algorithm: forward elimination then back substitution, no pivoting

        Args:
            rhs: Right-hand side, shape (M,) or (M, K) for K simultaneous systems

        Returns:
            Solution with the same shape as rhs
        """
        d = np.array(rhs, dtype=np.float64)
        if d.shape[0] != self.size:
            raise ValueError(f"Right-hand side has {d.shape[0]} rows, system has {self.size}")

        n = self.size
        c_prime = np.zeros(n)
        c_prime[0] = self.sup[0] / self.main[0]
        d[0] = d[0] / self.main[0]
        # Framåtelimination
        for i in range(1, n):
            denom = self.main[i] - self.sub[i] * c_prime[i - 1]
            c_prime[i] = self.sup[i] / denom
            d[i] = (d[i] - self.sub[i] * d[i - 1]) / denom

        # Bakåtsubstitution
        for i in range(n - 2, -1, -1):
            d[i] = d[i] - c_prime[i] * d[i + 1]
        return d


def _padded(u: Union[GridFunction, np.ndarray]) -> np.ndarray:
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=np.float64)


def delta_x(u: GridFunction) -> np.ndarray:
    """(delta_x u)_j = (u_{j+1} - u_{j-1}) / 2h"""
    v = u.values
    return (v[2:] - v[:-2]) / (2.0 * u.grid.mesh)


def delta_x2(u: GridFunction) -> np.ndarray:
    """(delta_x^2 u)_j = (u_{j+1} - 2u_j + u_{j-1}) / h^2"""
    v = u.values
    h = u.grid.mesh
    return (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)


def simpson_apply(u: GridFunction) -> np.ndarray:
    """(sigma_x u)_j = (u_{j-1} + 4u_j + u_{j+1}) / 6"""
    v = u.values
    return (v[:-2] + 4.0 * v[1:-1] + v[2:]) / 6.0


def _require_homogeneous(u: GridFunction) -> HomogeneousGridFunction:
    if isinstance(u, HomogeneousGridFunction):
        return u
    return u.to_homogeneous()


def hermitian_derivative(u: GridFunction) -> HomogeneousGridFunction:
    """
    Hermitian derivative u_x of a homogeneous grid function

    Solves sigma_x u_x = delta_x u on the interior with (u_x)_0 = (u_x)_N = 0.

    Args:
        u: Homogeneous grid function

    Returns:
        u_x as a homogeneous grid function
    """
    u = _require_homogeneous(u)
    grid = u.grid
    system = TridiagonalSystem.simpson(grid.size)
    interior = system.solve(delta_x(u))
    return HomogeneousGridFunction.from_interior(grid, interior)


def delta_x4(u: GridFunction, u_x: Optional[HomogeneousGridFunction] = None) -> np.ndarray:
    """
    Discrete biharmonic operator

    delta_x^4 u = (12/h^2) [delta_x u_x - delta_x^2 u]

    Args:
        u: Homogeneous grid function
        u_x: Precomputed Hermitian derivative (computed if omitted)
    """
    u = _require_homogeneous(u)
    if u_x is None:
        u_x = hermitian_derivative(u)
    h = u.grid.mesh
    return (12.0 / (h * h)) * (delta_x(u_x) - delta_x2(u))


def delta_tilde_x2(u: GridFunction, u_x: Optional[HomogeneousGridFunction] = None) -> np.ndarray:
    """Fourth-order second difference: 2 delta_x^2 u - delta_x u_x"""
    u = _require_homogeneous(u)
    if u_x is None:
        u_x = hermitian_derivative(u)
    return 2.0 * delta_x2(u) - delta_x(u_x)


def spline_second_derivative(u: GridFunction) -> dict:
    """
    Both closed forms of the spline second derivative at interior nodes

    Returns:
        Dict with 'tilde_form' = delta~_x^2 u - (h^2/12) delta_x^4 u and
        'plain_form' = delta_x^2 u - (h^2/6) delta_x^4 u
    """
    u = _require_homogeneous(u)
    u_x = hermitian_derivative(u)
    h2 = u.grid.mesh ** 2
    d4 = delta_x4(u, u_x)
    return {
        'tilde_form': delta_tilde_x2(u, u_x) - (h2 / 12.0) * d4,
        'plain_form': delta_x2(u) - (h2 / 6.0) * d4,
    }


class DboMatrix:
    """Dense (N-1)x(N-1) matrix of delta_x^4 acting on interior unknowns"""

    def __init__(self, grid: Grid, entries: np.ndarray):
        entries = np.array(entries, dtype=np.float64)
        if entries.shape != (grid.size, grid.size):
            raise ValueError(f"DBO matrix for {grid} must be {grid.size}x{grid.size}, got {entries.shape}")
        entries.flags.writeable = False
        self.grid = grid
        self.entries = entries

    def matvec(self, u: GridFunction) -> np.ndarray:
        return self.entries @ _padded(u)[1:-1]

    def symmetry_defect(self) -> float:
        """max |D - D^T| relative to max |D|"""
        return float(np.max(np.abs(self.entries - self.entries.T)) / np.max(np.abs(self.entries)))


def assemble_dbo_matrix(grid: Grid) -> DboMatrix:
    """
    Assemble D column by column: column k is delta_x^4 of the k-th unit vector

    The tridiagonal solve runs on all N-1 unit right-hand sides at once.
    """
    n = grid.size
    h = grid.mesh
    identity = np.eye(n)
    padded = np.zeros((n + 2, n))
    padded[1:-1] = identity

    # delta_x of every unit vector, then the Hermitian derivative columns
    rhs = (padded[2:] - padded[:-2]) / (2.0 * h)
    u_x = np.zeros((n + 2, n))
    u_x[1:-1] = TridiagonalSystem.simpson(n).solve(rhs)

    d_ux = (u_x[2:] - u_x[:-2]) / (2.0 * h)
    d2 = (padded[2:] - 2.0 * padded[1:-1] + padded[:-2]) / (h * h)
    entries = (12.0 / (h * h)) * (d_ux - d2)
    logger.debug(f"Assembled DBO matrix for {grid}")
    return DboMatrix(grid, entries)
