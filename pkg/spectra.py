#!/usr/bin/env python3
"""
Spectra Module
Eigenvalues of d^4/dx^4 with clamped ends (cos b cosh b = 1), discrete
eigenvalues of delta_x^4 through the kernel matrix (Nystrom view), traces and
convergence diagnostics.

Indexing: k = 1 is the first (smallest) eigenvalue, i.e. the root in
(3pi/2, 2pi).
"""
import logging
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from grid import Grid, make_grid
from kernel import assemble_kernel_matrix, hs_norm_difference, kernel_K

logger = logging.getLogger(__name__)


class BracketError(RuntimeError):
    """A root bracket had no sign change"""


class JacobiConvergenceError(RuntimeError):
    """Cyclic Jacobi did not reach the off-diagonal tolerance"""


class DegenerateModeError(RuntimeError):
    """Eigenfunction coefficients vanish"""


# Continuous spectrum --------------------------------------------------------

# Above this the hyperbolic term is below the smallest normal double
SECH_CUTOFF = 700.0


def _sech(beta: float) -> float:
    e = np.exp(-beta)
    return 2.0 * e / (1.0 + e * e)


def _anchor(k: int) -> float:
    return (k + 0.5) * np.pi


def _offset_sign(k: int) -> int:
    # Odd k: root above (k+1/2)pi, even k: below
    return 1 if k % 2 == 1 else -1


def _offset_equation(k: int) -> tuple:
    """g(e) = cos(a + e) - sech(a + e) in the offset e from a = (k+1/2)pi, with derivative"""
    a = _anchor(k)
    sign = 1.0 if k % 2 == 1 else -1.0

    def g(e):
        return sign * np.sin(e) - _sech(a + e)

    def g_prime(e):
        b = a + e
        return sign * np.cos(e) + _sech(b) * np.tanh(b)

    return g, g_prime


class ContinuousSpectrum:
    """Positive roots of cos b cosh b = 1 and the eigenvalues lambda_k = b^4"""

    def __init__(self, offsets: Sequence[float], residuals: Sequence[float]):
        self.offsets = np.asarray(offsets, dtype=np.float64)
        self.count = len(self.offsets)
        ks = np.arange(1, self.count + 1)
        self.anchors = (ks + 0.5) * np.pi
        self.betas = self.anchors + self.offsets
        self.lambdas = self.betas ** 4
        self.residuals = np.asarray(residuals, dtype=np.float64)

    def bracket(self, k: int) -> tuple:
        """Open interval known to contain the k-th root"""
        a = _anchor(k)
        return (a, a + 0.5 * np.pi) if _offset_sign(k) > 0 else (a - 0.5 * np.pi, a)

    def in_brackets(self) -> np.ndarray:
        """Strict bracket membership of every root, judged on the offsets"""
        ks = np.arange(1, self.count + 1)
        signs = np.where(ks % 2 == 1, 1.0, -1.0)
        e = signs * self.offsets
        resolved = self.anchors <= SECH_CUTOFF
        return np.where(resolved, (e > 0.0) & (e < 0.5 * np.pi), e == 0.0)

    def lambda_(self, k: int) -> float:
        return float(self.lambdas[k - 1])

    def beta(self, k: int) -> float:
        return float(self.betas[k - 1])


def _solve_root(k: int) -> tuple:
    a = _anchor(k)
    if a > SECH_CUTOFF:
        return 0.0, float(np.cos(a))
    g, g_prime = _offset_equation(k)
    lo, hi = (0.0, 0.5 * np.pi) if _offset_sign(k) > 0 else (-0.5 * np.pi, 0.0)
    try:
        rough = optimize.bisect(g, lo, hi, xtol=1e-13, maxiter=200)
    except ValueError as e:
        raise BracketError(f"No sign change in bracket for root {k}: {e}")
    polished = optimize.newton(g, rough, fprime=g_prime, tol=np.finfo(np.float64).tiny, rtol=1e-14, maxiter=50)
    if not lo < polished < hi:
        raise BracketError(f"Newton polish left the bracket for root {k}")
    return float(polished), float(g(polished))


@lru_cache(maxsize=8)
def _cached_offsets(k_max: int) -> tuple:
    solved = [_solve_root(k) for k in range(1, k_max + 1)]
    return tuple(s[0] for s in solved), tuple(s[1] for s in solved)


def continuous_spectrum(k_max: int) -> ContinuousSpectrum:
    """
    First k_max eigenvalues of u'''' = lambda u, u = u' = 0 at both ends

    Each root is located by bisection in its bracket then polished by Newton,
    both in the offset from (k+1/2)pi so that cosh never overflows.

    Args:
        k_max: Number of eigenvalues (>= 1)

    Returns:
        ContinuousSpectrum with increasing betas and lambdas
    """
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    offsets, residuals = _cached_offsets(int(k_max))
    logger.debug(f"Solved {k_max} roots of cos b cosh b = 1")
    return ContinuousSpectrum(offsets, residuals)


# Eigenfunctions -------------------------------------------------------------

def _mode_coefficients(beta: float) -> tuple:
    """sigma, P, Q for phi = cos bx - sigma sin bx - (P e^{b(x-1)} + Q e^{-bx})"""
    e1 = np.exp(-beta)
    den = 1.0 - e1 * e1 - 2.0 * np.sin(beta) * e1
    if den == 0.0:
        raise DegenerateModeError(f"Mode coefficients vanish for beta={beta!r}")
    sigma = (1.0 + e1 * e1 - 2.0 * np.cos(beta) * e1) / den
    p_coef = (np.cos(beta) - np.sin(beta) - e1) / den
    q_coef = 0.5 * (1.0 + sigma)
    return sigma, p_coef, q_coef


def _raw_mode(beta: float, x, derivative: int = 0):
    sigma, p_coef, q_coef = _mode_coefficients(beta)
    x = np.asarray(x, dtype=np.float64)
    shift = 0.5 * np.pi * derivative
    trig = np.cos(beta * x + shift) - sigma * np.sin(beta * x + shift)
    hyper = p_coef * np.exp(beta * (x - 1.0)) + (-1.0) ** derivative * q_coef * np.exp(-beta * x)
    return beta ** derivative * (trig - hyper)


@lru_cache(maxsize=256)
def _normalization(beta: float) -> float:
    xs = np.linspace(0.0, 1.0, 2049)
    norm2 = integrate.simpson(_raw_mode(beta, xs) ** 2, x=xs)
    # sign chosen so that phi > 0 just right of x = 0
    return -1.0 / np.sqrt(norm2)


def eigenfunction(beta: float, x, derivative: int = 0):
    """
    L2-normalised clamped mode for a root beta, or one of its derivatives

    phi(x) = A cos bx + B sin bx - A cosh bx - B sinh bx with
    A (cos b - cosh b) = -B (sin b - sinh b), evaluated in an overflow-free form.

    Args:
        beta: A root of cos b cosh b = 1
        x: Point(s) in [0,1]
        derivative: Order of the x-derivative (0..4)
    """
    if derivative < 0:
        raise ValueError(f"Derivative order must be >= 0, got {derivative}")
    value = _normalization(float(beta)) * _raw_mode(float(beta), x, derivative)
    return float(value) if np.ndim(value) == 0 else value


# Discrete spectrum ----------------------------------------------------------

def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple:
    """
    Cyclic Jacobi eigenvalue iteration for a dense symmetric matrix

    Sweeps over all (p, q) pairs in row order until the off-diagonal Frobenius
    norm is at most tol * ||A||_F.

    Args:
        matrix: Symmetric matrix
        tol: Relative off-diagonal tolerance
        max_sweeps: Sweep limit

    Returns:
        (eigenvalues, eigenvectors as columns, sweeps used), unsorted
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"Jacobi needs a square matrix, got shape {a.shape}")
    v = np.eye(n)
    fro = np.linalg.norm(a)
    eps = np.finfo(np.float64).eps
    tiny = np.finfo(np.float64).tiny

    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        logger.debug(f"Jacobi sweep {sweep}: off-diagonal norm {off:.3e}")
        if off <= tol * fro:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                # rotation angle below roundoff: theta stays finite after this
                if abs(apq) < tiny or abs(apq) <= eps * max(np.sqrt(abs(app * aqq)), 0.5 * abs(aqq - app)):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                t = (1.0 if theta >= 0.0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0

                vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    raise JacobiConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")


class DiscreteSpectrum:
    """Eigenvalues lambda_{h,k} of delta_x^4, from the eigenvalues of K^h"""

    def __init__(self, grid: Grid, kernel_eigenvalues: np.ndarray, kernel_eigenvectors: np.ndarray,
                 sweeps: int = 0):
        order = np.argsort(kernel_eigenvalues)[::-1]
        mu = np.asarray(kernel_eigenvalues, dtype=np.float64)[order]
        if np.any(mu <= 0.0):
            raise ValueError(f"Kernel matrix on {grid} is not positive definite (min eigenvalue {mu.min():.3e})")
        self.grid = grid
        self.kernel_eigenvalues = mu
        self.kernel_eigenvectors = np.asarray(kernel_eigenvectors)[:, order]
        self.lambdas_h = 1.0 / mu
        self.sweeps = sweeps

    def lambda_h(self, k: int) -> float:
        if not 1 <= k <= len(self.lambdas_h):
            raise ValueError(f"k must satisfy 1 <= k <= {len(self.lambdas_h)} on {self.grid}, got {k}")
        return float(self.lambdas_h[k - 1])


@lru_cache(maxsize=32)
def _cached_discrete(n_intervals: int) -> DiscreteSpectrum:
    grid = make_grid(n_intervals)
    kernel = assemble_kernel_matrix(grid)
    values, vectors, sweeps = jacobi_eigh(kernel.entries)
    logger.debug(f"Discrete spectrum for N={n_intervals}: {sweeps} Jacobi sweeps")
    return DiscreteSpectrum(grid, values, vectors, sweeps)


def discrete_spectrum(grid: Grid) -> DiscreteSpectrum:
    """
    lambda_{h,1} <= ... <= lambda_{h,N-1}: reciprocals of the eigenvalues of K^h

    Args:
        grid: Grid with N >= 2

    Returns:
        DiscreteSpectrum
    """
    return _cached_discrete(grid.n_intervals)


# Traces ---------------------------------------------------------------------

def trace_gamma() -> float:
    """Gamma = integral of K(x,x) = x^3 (1-x)^3 / 3 over [0,1], integrated exactly"""
    # x^3 (1-x)^3 = sum_i C(3,i) (-1)^i x^(3+i)
    integral = sum(Fraction(comb(3, i) * (-1) ** i, 4 + i) for i in range(4))
    return float(integral / 3)


def trace_gamma_h(grid: Grid) -> float:
    """Gamma_h = h * sum K(x_i, x_i) over interior nodes"""
    return float(grid.mesh * sum(kernel_K(float(x), float(x)) for x in grid.interior))


def trace_gamma_h_closed_form(grid: Grid) -> float:
    """Gamma_h = 1/420 + h^4/180 - h^6/126"""
    h = grid.mesh
    return 1.0 / 420.0 + h ** 4 / 180.0 - h ** 6 / 126.0


# Convergence ----------------------------------------------------------------

class SpectrumReport:
    """Paired continuous/discrete eigenvalues with errors and fitted slopes"""

    def __init__(self, k_list: Sequence[int], n_list: Sequence[int], rows: List[Dict],
                 slopes: Dict[int, float], continuous: Dict[int, float]):
        self.k_list = sorted(k_list)
        self.n_list = sorted(n_list)
        self.rows = sorted(rows, key=lambda r: (r['k'], r['N']))
        self.slopes = slopes
        self.continuous = continuous

    def errors(self, k: int) -> np.ndarray:
        return np.array([r['abs_error'] for r in self.rows if r['k'] == k])

    def slope_rows(self) -> List[Dict]:
        return [{'k': k, 'slope': self.slopes.get(k, float('nan'))} for k in self.k_list]


def fit_slope(n_values: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(N)"""
    n_values = np.asarray(n_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if len(n_values) < 2 or np.any(errors <= 0.0):
        return float('nan')
    slope, _ = np.polyfit(np.log(n_values), np.log(errors), 1)
    return float(slope)


def convergence_study(k_list: Sequence[int], n_list: Sequence[int]) -> SpectrumReport:
    """
    Errors |lambda_k - lambda_{h,k}| for every (k, N) and the fitted rate per k

    Args:
        k_list: Eigenvalue indices (>= 1)
        n_list: Grid sizes; requires max(k_list) < min(n_list) - 1

    Returns:
        SpectrumReport
    """
    k_list = sorted(set(int(k) for k in k_list))
    n_list = sorted(set(int(n) for n in n_list))
    if not k_list or not n_list:
        raise ValueError("Convergence study needs at least one k and one N")
    if min(k_list) < 1:
        raise ValueError(f"Eigenvalue indices start at 1, got {min(k_list)}")
    if max(k_list) >= min(n_list) - 1:
        raise ValueError(f"Need max(k) < min(N) - 1, got k={max(k_list)}, N={min(n_list)}")

    spectrum = continuous_spectrum(max(k_list))
    continuous = {k: spectrum.lambda_(k) for k in k_list}
    rows = []
    for n in n_list:
        logger.info(f"Discrete spectrum N={n}")
        discrete = discrete_spectrum(make_grid(n))
        for k in k_list:
            lam, lam_h = continuous[k], discrete.lambda_h(k)
            rows.append({
                'k': k, 'N': n, 'lambda': lam, 'lambda_h': lam_h,
                'abs_error': abs(lam - lam_h), 'rel_error': abs(lam - lam_h) / lam,
            })
    slopes = {k: fit_slope(n_list, [r['abs_error'] for r in rows if r['k'] == k]) for k in k_list}
    return SpectrumReport(k_list, n_list, rows, slopes, continuous)


def distance_bound_study(k_list: Sequence[int], n_list: Sequence[int]) -> Dict:
    """dist(1/lambda_k, {1/lambda_{h,j}}) * N^4 for each (k, N); the bound is the maximum"""
    spectrum = continuous_spectrum(max(k_list))
    rows = []
    for n in sorted(n_list):
        inverse = discrete_spectrum(make_grid(n)).kernel_eigenvalues
        for k in sorted(k_list):
            distance = float(np.min(np.abs(1.0 / spectrum.lambda_(k) - inverse)))
            rows.append({'k': k, 'N': n, 'distance': distance, 'scaled': distance * n ** 4})
    return {'status': 'pass', 'rows': rows, 'bound': max(r['scaled'] for r in rows)}


def monotonicity_observation(n_list: Sequence[int]) -> Dict:
    """Whether lambda_{h,1} increased with N over the sweep (reported, never enforced)"""
    n_list = sorted(n_list)
    first = [discrete_spectrum(make_grid(n)).lambda_h(1) for n in n_list]
    increasing = bool(np.all(np.diff(first) > 0.0))
    return {'status': 'observed' if increasing else 'not observed', 'N': n_list, 'lambda_h_1': first}


# Hilbert-Schmidt inequality ---------------------------------------------------

def hs_inequality_check(grid: Grid, tail_terms: int = 200, approx: Optional[Callable] = None) -> Dict:
    """
    sum_{k<N} |1/lambda_k - 1/lambda_{h,k}|^2 + sum_{k>=N} 1/lambda_k^2  <=  ||K - K_h||^2

    Roots up to N-1+tail_terms are computed; the remaining tail is enclosed
    using b_k in (k pi, (k+1) pi) and an integral comparison.

    Args:
        grid: Grid
        tail_terms: Explicit continuous roots beyond N-1 (>= 100)
        approx: Replacement for K_h on the right-hand side (negative control)

    Returns:
        Dict with 'status', both sides, the tail enclosure and right / h^2
    """
    if tail_terms < 100:
        raise ValueError(f"tail_terms must be >= 100, got {tail_terms}")
    n = grid.n_intervals
    last = n - 1 + tail_terms
    spectrum = continuous_spectrum(last)
    discrete = discrete_spectrum(grid)

    inv_cont = 1.0 / spectrum.lambdas
    head = float(np.sum((inv_cont[:n - 1] - discrete.kernel_eigenvalues) ** 2))
    explicit_tail = float(np.sum(inv_cont[n - 1:] ** 2))
    remainder_lower = np.pi ** -8 * (last + 2) ** -7 / 7.0
    remainder_upper = np.pi ** -8 * last ** -7 / 7.0

    right = hs_norm_difference(grid, approx) ** 2
    left_lower = head + explicit_tail + remainder_lower
    left_upper = head + explicit_tail + remainder_upper
    holds = left_lower <= right
    if not holds:
        logger.warning(f"HS inequality fails on {grid}: left >= {left_lower:.6e}, right = {right:.6e}")
    return {
        'status': 'pass' if holds else 'fail',
        'N': n,
        'head': head,
        'tail': [explicit_tail + remainder_lower, explicit_tail + remainder_upper],
        'left': [left_lower, left_upper],
        'right': right,
        'holds_against_upper': left_upper <= right,
        'right_over_h2': right / grid.mesh ** 2,
    }


# Variational checks ----------------------------------------------------------

def power_iteration(matrix: np.ndarray, k_max: int, iterations: int = 200, seed: int = 0) -> tuple:
    """
    Largest k_max eigenpairs of a symmetric positive matrix by deflated power iteration

    Returns:
        (eigenvalues, eigenvectors as columns)
    """
    a = np.asarray(matrix, dtype=np.float64)
    rng = np.random.default_rng(seed)
    values, vectors = [], []
    deflated = a.copy()
    for _ in range(k_max):
        x = rng.standard_normal(a.shape[0])
        x /= np.linalg.norm(x)
        for _ in range(iterations):
            y = deflated @ x
            x = y / np.linalg.norm(y)
        mu = float(x @ deflated @ x)
        values.append(mu)
        vectors.append(x)
        deflated = deflated - mu * np.outer(x, x)
    return np.array(values), np.column_stack(vectors)


def rayleigh_check(grid: Grid, k_max: int = 1, samples: int = 100, seed: int = 0) -> Dict:
    """
    Cross-check the leading eigenvalues of K^h and the max-principle for the first one

    Args:
        grid: Grid with N >= 3
        k_max: Number of leading eigenvalues of K^h compared with power iteration
        samples: Random unit vectors used for the Rayleigh quotient bound
        seed: Seed for the random vectors

    Returns:
        Dict with 'status' and the measured deviations
    """
    if grid.n_intervals < 3:
        raise ValueError(f"Rayleigh check needs N >= 3, got N={grid.n_intervals}")
    if not 1 <= k_max <= grid.size:
        raise ValueError(f"k_max must satisfy 1 <= k_max <= {grid.size}, got {k_max}")
    kernel = assemble_kernel_matrix(grid).entries
    discrete = discrete_spectrum(grid)
    power_values, _ = power_iteration(kernel, k_max, seed=seed)
    jacobi_values = discrete.kernel_eigenvalues[:k_max]
    deviation = float(np.max(np.abs(power_values - jacobi_values) / jacobi_values))

    rng = np.random.default_rng(seed)
    u = rng.standard_normal((samples, grid.size))
    u /= np.linalg.norm(u, axis=1)[:, None]
    quotients = np.einsum('ij,jk,ik->i', u, kernel, u)
    rayleigh_excess = float(np.max(quotients) - discrete.kernel_eigenvalues[0])

    first = discrete.kernel_eigenvectors[:, 0]
    first = first if first.sum() >= 0.0 else -first
    nonnegative = bool(np.min(first) >= -1e-12 * np.max(np.abs(first)))

    passed = deviation <= 1e-8 and rayleigh_excess <= 1e-12 and nonnegative
    return {
        'status': 'pass' if passed else 'fail',
        'N': grid.n_intervals,
        'power_vs_jacobi': deviation,
        'rayleigh_excess': rayleigh_excess,
        'first_mode_nonnegative': nonnegative,
    }
