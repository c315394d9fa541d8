#!/usr/bin/env python3
"""
Green's Kernel Module
Continuous Green's function of d^4/dx^4 with clamped ends, the discrete
resolvent K^h = (delta_x^4)^{-1}, and the piecewise constant kernel K_h.
"""
import logging
from math import comb
from typing import Callable, Dict, List, Optional

import numpy as np
from numpy.polynomial import Polynomial

from grid import Grid, GridFunction, HomogeneousGridFunction
from operators import hermitian_derivative

logger = logging.getLogger(__name__)


class SingularMomentSystemError(RuntimeError):
    """The 4x4 boundary moment system could not be solved"""


def _check_unit_interval(*values) -> None:
    for value in values:
        arr = np.asarray(value, dtype=np.float64)
        if np.any(arr < 0.0) or np.any(arr > 1.0) or np.any(np.isnan(arr)):
            raise ValueError(f"Kernel arguments must lie in [0, 1], got {value!r}")


def kernel_K_vectorized(x, y) -> np.ndarray:
    """K(x, y) evaluated elementwise on broadcast arrays (no range check)"""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    # y <= x branch; the other branch is the same expression with x and y swapped
    lower = (1.0 - x) ** 2 * y ** 2 * (2.0 * x * (1.0 - y) + x - y) / 6.0
    upper = (1.0 - y) ** 2 * x ** 2 * (2.0 * y * (1.0 - x) + y - x) / 6.0
    return np.where(y <= x, lower, upper)


def kernel_K(x: float, y: float) -> float:
    """
    Green's function of u'''' = f with u = u' = 0 at both ends

    Args:
        x, y: Points in [0,1]

    Returns:
        K(x, y), symmetric and nonnegative
    """
    _check_unit_interval(x, y)
    if x == y:
        return x ** 3 * (1.0 - x) ** 3 / 3.0
    if y < x:
        return (1.0 - x) ** 2 * y ** 2 * (2.0 * x * (1.0 - y) + x - y) / 6.0
    return (1.0 - y) ** 2 * x ** 2 * (2.0 * y * (1.0 - x) + y - x) / 6.0


class KernelMatrix:
    """Dense symmetric (N-1)x(N-1) matrix of the discrete resolvent"""

    def __init__(self, grid: Grid, entries: np.ndarray):
        entries = np.array(entries, dtype=np.float64)
        if entries.shape != (grid.size, grid.size):
            raise ValueError(f"Kernel matrix for {grid} must be {grid.size}x{grid.size}, got {entries.shape}")
        entries.flags.writeable = False
        self.grid = grid
        self.entries = entries

    def apply(self, f: np.ndarray) -> np.ndarray:
        """K^h applied to interior values"""
        return self.entries @ np.asarray(f, dtype=np.float64)

    def trace(self) -> float:
        return float(np.trace(self.entries))

    def negated(self) -> "KernelMatrix":
        """Sign-flipped copy, used as a fault injection in verification runs"""
        return KernelMatrix(self.grid, -self.entries)


def assemble_kernel_matrix(grid: Grid) -> KernelMatrix:
    """K^h_{ij} = h K(x_i, x_j) on the interior nodes"""
    x = grid.interior
    entries = grid.mesh * kernel_K_vectorized(x[:, None], x[None, :])
    # exact symmetry: copy the lower triangle over the upper one
    entries = np.tril(entries) + np.tril(entries, -1).T
    return KernelMatrix(grid, entries)


def assemble_kernel_closed_form(grid: Grid) -> KernelMatrix:
    """
    K^h from the generating-polynomial closed form, independent of kernel_K

    K^h_{jk} = (1/6N) (1-x_j)^2 x_k^2 (2 x_j (1-x_k) + x_j - x_k) for k <= j
    """
    n = grid.n_intervals
    idx = np.arange(1, n)
    j = idx[:, None].astype(np.float64)
    k = idx[None, :].astype(np.float64)
    xj, xk = j / n, k / n
    lower = (1.0 - xj) ** 2 * xk ** 2 * (2.0 * xj * (1.0 - xk) + xj - xk) / (6.0 * n)
    entries = np.where(k <= j, lower, lower.T)
    return KernelMatrix(grid, entries)


def solve_biharmonic(f: GridFunction, kernel: Optional[KernelMatrix] = None) -> HomogeneousGridFunction:
    """
    Solve delta_x^4 u = f with u, u_x in l2_{h,0}

    Args:
        f: Forcing; only interior values are read
        kernel: Precomputed K^h for f.grid (assembled if omitted)

    Returns:
        u = K^h f with zero boundary values
    """
    grid = f.grid
    if kernel is None:
        kernel = assemble_kernel_matrix(grid)
    elif kernel.grid != grid:
        raise ValueError(f"Kernel matrix is for {kernel.grid!r}, forcing lives on {grid!r}")
    return HomogeneousGridFunction.from_interior(grid, kernel.apply(f.values[1:-1]))


def _cell_index(grid: Grid, x) -> np.ndarray:
    # Cells are [x_i - h/2, x_i + h/2] clipped to [0,1]
    n = grid.n_intervals
    return np.clip(np.floor(np.asarray(x, dtype=np.float64) * n + 0.5), 0, n).astype(int)


def piecewise_kernel(grid: Grid, x, y):
    """
    Piecewise constant kernel K_h(x, y) = K(x_i, x_j) on the cell around (x_i, x_j)

    Accepts scalars or broadcastable arrays.
    """
    _check_unit_interval(x, y)
    nodes = grid.nodes
    value = kernel_K_vectorized(nodes[_cell_index(grid, x)], nodes[_cell_index(grid, y)])
    return float(value) if np.ndim(value) == 0 else value


def _gauss_01(points: int) -> tuple:
    t, w = np.polynomial.legendre.leggauss(points)
    return 0.5 * (t + 1.0), 0.5 * w


def hs_norm_difference(grid: Grid, approx: Optional[Callable] = None,
                       rect_points: int = 4, triangle_points: int = 6) -> float:
    """
    Hilbert-Schmidt distance sqrt( integral over [0,1]^2 of |K - K_h|^2 )

    Off-diagonal cells use tensor Gauss-Legendre. Cells cut by x = y are split
    into two triangles (collapsed coordinates) since K has a kink there.

    Args:
        grid: Grid defining the cells of K_h
        approx: Kernel compared against K, called on arrays (defaults to K_h)
        rect_points: Gauss points per direction on rectangles
        triangle_points: Gauss points per direction on triangles

    Returns:
        The L2([0,1]^2) norm of K - approx
    """
    if approx is None:
        def approx(x, y):
            return piecewise_kernel(grid, x, y)

    n = grid.n_intervals
    h = grid.mesh
    edges = np.concatenate(([0.0], (np.arange(n) + 0.5) * h, [1.0]))
    lo, hi = edges[:-1], edges[1:]
    widths = hi - lo

    # Rectangles: all (i, j) cells, diagonal ones masked out below
    t, w = _gauss_01(rect_points)
    pts = (lo[:, None] + widths[:, None] * t[None, :]).ravel()
    wts = (widths[:, None] * w[None, :]).ravel()
    X, Y = np.meshgrid(pts, pts, indexing='ij')
    diff2 = (kernel_K_vectorized(X, Y) - approx(X, Y)) ** 2
    cell = np.repeat(np.arange(n + 1), rect_points)
    off_diagonal = cell[:, None] != cell[None, :]
    total = float(np.sum(np.outer(wts, wts) * diff2 * off_diagonal))

    # Diagonal cells: triangles y <= x and y >= x, x = a + L s, y = a + L s t
    s, ws = _gauss_01(triangle_points)
    S, T = np.meshgrid(s, s, indexing='ij')
    WS = np.outer(ws, ws)
    for a, length in zip(lo, widths):
        x_tri = a + length * S
        y_tri = a + length * S * T
        jac = length * length * S
        lower = (kernel_K_vectorized(x_tri, y_tri) - approx(x_tri, y_tri)) ** 2
        upper = (kernel_K_vectorized(y_tri, x_tri) - approx(y_tri, x_tri)) ** 2
        total += float(np.sum(WS * jac * (lower + upper)))

    logger.debug(f"HS quadrature on {grid}: {(n + 1) ** 2} cells")
    return float(np.sqrt(max(total, 0.0)))


def brute_force_hs_difference(grid: Grid, samples: int = 2000, chunk: int = 200) -> float:
    """Midpoint-rule estimate of the HS distance on a samples x samples mesh"""
    mids = (np.arange(samples) + 0.5) / samples
    total = 0.0
    for start in range(0, samples, chunk):
        X, Y = np.meshgrid(mids[start:start + chunk], mids, indexing='ij')
        total += float(np.sum((kernel_K_vectorized(X, Y) - piecewise_kernel(grid, X, Y)) ** 2))
    return float(np.sqrt(total / samples ** 2))


def probe_kernel(resolution: int) -> Dict[str, np.ndarray]:
    """K sampled on a resolution x resolution uniform probe grid including the ends"""
    xs = np.linspace(0.0, 1.0, resolution)
    X, Y = np.meshgrid(xs, xs, indexing='ij')
    return {'x': X.ravel(), 'y': Y.ravel(), 'K': kernel_K_vectorized(X, Y).ravel()}


# Boundary moment system ----------------------------------------------------

UNKNOWNS = ('u_1', 'u_N-1', 'ux_1', 'ux_N-1')


def moments(f: GridFunction) -> np.ndarray:
    """m_k = phi^(k)(1) for phi(z) = sum f_j z^j, i.e. sum j(j-1)..(j-k+1) f_j"""
    j = np.arange(1, f.grid.n_intervals, dtype=np.float64)
    fj = f.values[1:-1]
    falling = [np.ones_like(j), j, j * (j - 1.0), j * (j - 1.0) * (j - 2.0)]
    return np.array([np.dot(p, fj) for p in falling])


def _derived_system(grid: Grid) -> tuple:
    """
    Rows r^(k)(1), k = 0..3, from exact differentiation of r(z)

    Returns (A, M) such that r^(k)(1) = A[k] . unknowns + M[k] . moments.
    """
    n = grid.n_intervals
    h = grid.mesh
    z = Polynomial([0.0, 1.0])
    simpson = Polynomial([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])
    z_tail = Polynomial.basis(n + 1)
    half_h = 1.0 / (2.0 * h)

    # Coefficient polynomial of each unknown in r(z)
    unknown_polys = [
        -simpson * z / h**2 + half_h * (z**2 - 1) * (-half_h * z),
        -simpson * z_tail / h**2 + half_h * (z**2 - 1) * (half_h * z_tail),
        simpson * half_h * z + half_h * (z**2 - 1) * (z / 6.0),
        -simpson * half_h * z_tail + half_h * (z**2 - 1) * (z_tail / 6.0),
    ]
    A = np.array([[p.deriv(k)(1.0) if k else p(1.0) for p in unknown_polys] for k in range(4)])

    # phi-part (h^2/12) S(z) z phi(z): Leibniz rule on g = S(z) z
    g = simpson * z
    g_derivs = [g(1.0)] + [g.deriv(i)(1.0) for i in range(1, 4)]
    M = np.zeros((4, 4))
    for k in range(4):
        for i in range(k + 1):
            M[k, i] = h**2 / 12.0 * comb(k, i) * g_derivs[k - i]
    return A, M


def _printed_system(grid: Grid) -> tuple:
    """The boundary equations with coefficients as they appear in print"""
    n = float(grid.n_intervals)
    h = grid.mesh
    ih2 = 1.0 / h**2
    i2h = 1.0 / (2.0 * h)
    A = np.array([
        [-ih2, -ih2, i2h, -i2h],
        [-2.5 * ih2, -(n + 1.5) * ih2, (7.0 / 3.0) * i2h, -(n + 5.0 / 3.0) * i2h],
        [-(23.0 / 6.0) * ih2, -(5.0 / 6.0 + 2 * n + n**2) * ih2,
         (10.0 / 3.0) * i2h, -(4.0 / 3.0 + 7.0 * n / 3.0 + n**2) * i2h],
        [-2.5 * ih2, -(-0.5 + 1.5 * n**2 + n**3) * ih2,
         2.0 * i2h, -(n + 2 * n**2 + n**3) * i2h],
    ])
    h2 = h**2
    M = np.array([
        [h2 / 12.0, 0.0, 0.0, 0.0],
        [h2, h2 / 12.0, 0.0, 0.0],
        [7.0 * h2 / 36.0, h2 / 3.0, h2 / 12.0, 0.0],
        [h2 / 12.0, 7.0 * h2 / 12.0, h2 / 2.0, h2 / 12.0],
    ])
    return A, M


def moment_system(grid: Grid, source: str = 'derived') -> tuple:
    """
    Matrix form (A, M) of r(1) = r'(1) = r''(1) = r'''(1) = 0

    Args:
        grid: Grid with N >= 3
        source: 'derived' (polynomial differentiation) or 'printed'
    """
    if source == 'derived':
        return _derived_system(grid)
    if source == 'printed':
        return _printed_system(grid)
    raise ValueError(f"Unknown moment system source: {source!r}")


def audit_moment_system(grid: Grid, rtol: float = 1e-12) -> Dict:
    """
    Compare the printed boundary equations with the derived ones

    Returns:
        Dict with 'status' ('match' or 'mismatch') and the list of differing
        coefficients
    """
    derived_a, derived_m = _derived_system(grid)
    printed_a, printed_m = _printed_system(grid)
    mismatches: List[Dict] = []
    for label, derived, printed, columns in (
            ('unknown', derived_a, printed_a, UNKNOWNS),
            ('moment', derived_m, printed_m, ('m_0', 'm_1', 'm_2', 'm_3'))):
        scale = np.max(np.abs(derived), axis=1)
        for row in range(4):
            for col in range(4):
                if abs(derived[row, col] - printed[row, col]) > rtol * scale[row]:
                    mismatches.append({
                        'equation': f"r{row + 1}",
                        'kind': label,
                        'term': columns[col],
                        'derived': float(derived[row, col]),
                        'printed': float(printed[row, col]),
                    })
    for item in mismatches:
        logger.warning(f"Boundary system {item['equation']} coefficient of {item['term']}: "
                       f"printed {item['printed']:.6g}, derived {item['derived']:.6g}")
    return {'status': 'mismatch' if mismatches else 'match', 'grid': grid.n_intervals,
            'mismatches': mismatches}


def boundary_moment_solve(f: GridFunction, source: str = 'derived') -> tuple:
    """
    Boundary-adjacent values (u_1, u_{N-1}, (u_x)_1, (u_x)_{N-1}) from the moments of f

    Args:
        f: Forcing on a grid with N >= 3
        source: Which coefficient set to use, see moment_system

    Returns:
        Tuple of four floats
    """
    grid = f.grid
    if grid.n_intervals < 3:
        raise ValueError(f"Boundary moment system needs N >= 3, got N={grid.n_intervals}")
    A, M = moment_system(grid, source)
    rhs = -M @ moments(f)
    # Equilibrate: rows grow like N^5, u and u_x columns differ by a factor ~h
    col_scale = 1.0 / np.max(np.abs(A), axis=0)
    scaled = A * col_scale
    row_scale = 1.0 / np.max(np.abs(scaled), axis=1)
    try:
        solution = np.linalg.solve(scaled * row_scale[:, None], rhs * row_scale) * col_scale
    except np.linalg.LinAlgError as e:
        raise SingularMomentSystemError(f"Boundary moment system singular for N={grid.n_intervals}: {e}")
    if not np.all(np.isfinite(solution)):
        raise SingularMomentSystemError(f"Boundary moment system produced non-finite values for N={grid.n_intervals}")
    return tuple(float(v) for v in solution)


def boundary_values_from_solve(f: GridFunction) -> tuple:
    """The same four quantities read off solve_biharmonic and its Hermitian derivative"""
    u = solve_biharmonic(f)
    u_x = hermitian_derivative(u)
    return (float(u.values[1]), float(u.values[-2]), float(u_x.values[1]), float(u_x.values[-2]))
