#!/usr/bin/env python3
"""
Verification Suites
Seeded property checks of the discrete biharmonic calculus. Every suite
returns a result dict with 'status' ('pass' or 'fail'), the largest measured
deviation and, on failure, the first counterexample.
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from grid import HomogeneousGridFunction, inner_product_h, make_grid
from kernel import (assemble_kernel_closed_form, assemble_kernel_matrix, boundary_moment_solve,
                    boundary_values_from_solve, solve_biharmonic)
from operators import (TridiagonalSystem, assemble_dbo_matrix, delta_x, delta_x4,
                       hermitian_derivative, spline_second_derivative)
from spectra import (continuous_spectrum, discrete_spectrum, hs_inequality_check, trace_gamma,
                     trace_gamma_h, trace_gamma_h_closed_form)
from spline import (build_spline, bump_perturbed_energy, cross_energy, energy,
                    minimal_energy_derivatives, third_derivative_jumps)

logger = logging.getLogger(__name__)

RANDOM_SAMPLES = 1000
MINIMISER_SAMPLES = 5


def _random_homogeneous(rng: np.random.Generator, n: int) -> HomogeneousGridFunction:
    grid = make_grid(n)
    return HomogeneousGridFunction.from_interior(grid, rng.uniform(-1.0, 1.0, grid.size))


def _relative(a, b) -> float:
    """max|a - b| / max|b|, or the absolute deviation when b vanishes"""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    return diff / scale if scale > 0.0 else diff


class SuiteResult:
    """Collects deviations for one suite and remembers the first failure"""

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.checked = 0
        self.max_deviation = 0.0
        self.counterexample: Optional[Dict] = None
        self.notes: Dict = {}

    def record(self, deviation: float, tolerance: Optional[float] = None, **context) -> None:
        limit = self.tolerance if tolerance is None else tolerance
        self.checked += 1
        self.max_deviation = max(self.max_deviation, float(deviation))
        if not deviation <= limit and self.counterexample is None:
            self.counterexample = dict(context, deviation=float(deviation))

    def to_dict(self) -> Dict:
        status = 'fail' if self.counterexample is not None else 'pass'
        if status == 'fail':
            logger.warning(f"Suite {self.name} failed: {self.counterexample}")
        result = {
            'suite': self.name,
            'status': status,
            'checked': self.checked,
            'tolerance': self.tolerance,
            'max_deviation': self.max_deviation,
            'counterexample': self.counterexample,
        }
        result.update(self.notes)
        return result


def check_hermitian_residual(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """sigma_x u_x = delta_x u holds for the computed Hermitian derivative"""
    result = SuiteResult('hermitian_residual', 1e-12 * scale)
    for i in range(RANDOM_SAMPLES):
        n = int(n_list[i % len(n_list)])
        u = _random_homogeneous(rng, n)
        u_x = hermitian_derivative(u)
        lhs = TridiagonalSystem.simpson(u.grid.size).matvec(u_x.interior)
        result.record(_relative(lhs, delta_x(u)), N=n, u=u.values.tolist())
    return result.to_dict()


def check_derivative_equality(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Spline nodal slopes equal u_x and the Hermite spline is C^2 at the nodes"""
    result = SuiteResult('derivative_equality', 1e-12 * scale)
    for n in n_list:
        for _ in range(10):
            u = _random_homogeneous(rng, n)
            s = build_spline(u)
            u_x = hermitian_derivative(u)
            slopes = s.eval_d1(u.grid.nodes)
            result.record(_relative(slopes, u_x.values), N=n, check='slope', u=u.values.tolist())
            minus, plus = s.one_sided_second_derivatives()
            result.record(_relative(minus, plus), N=n, check='c2', u=u.values.tolist())
    return result.to_dict()


def check_jump_identity(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Jump of s''' at x_j equals h (delta_x^4 u)_j"""
    result = SuiteResult('jump_identity', 1e-9 * scale)
    for i in range(RANDOM_SAMPLES):
        n = int(n_list[i % len(n_list)])
        u = _random_homogeneous(rng, n)
        jumps = third_derivative_jumps(build_spline(u))
        result.record(_relative(jumps, u.grid.mesh * delta_x4(u)), N=n, u=u.values.tolist())
    return result.to_dict()


def check_energy_identity(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Integral of s_u'' s_v'' equals (delta_x^4 u, v)_h"""
    result = SuiteResult('energy_identity', 1e-9 * scale)
    for i in range(RANDOM_SAMPLES):
        n = int(n_list[i % len(n_list)])
        u, v = _random_homogeneous(rng, n), _random_homogeneous(rng, n)
        continuous = cross_energy(u, v)
        discrete = inner_product_h(HomogeneousGridFunction.from_interior(u.grid, delta_x4(u)), v)
        result.record(_relative(continuous, discrete), N=n, u=u.values.tolist(), v=v.values.tolist())
    return result.to_dict()


def check_second_derivative_forms(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """s''(x_j) matches both closed forms in terms of u and delta_x^4 u"""
    result = SuiteResult('second_derivative_forms', 1e-9 * scale)
    for n in n_list:
        for _ in range(10):
            u = _random_homogeneous(rng, n)
            nodal = build_spline(u).node_second_derivatives()
            forms = spline_second_derivative(u)
            for name, values in forms.items():
                result.record(_relative(values, nodal), N=n, form=name, u=u.values.tolist())
    return result.to_dict()


def check_minimiser(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """The spline minimises the energy: bump perturbations never lower it and cvxpy agrees"""
    result = SuiteResult('minimiser', 1e-5 * scale)
    for n in [n for n in n_list if n <= 32] or [min(n_list)]:
        for _ in range(MINIMISER_SAMPLES):
            u = _random_homogeneous(rng, n)
            s = build_spline(u)
            base = energy(s)
            amplitudes = rng.uniform(-1.0, 1.0, n)
            lowered = base - bump_perturbed_energy(s, amplitudes)
            result.record(max(lowered, 0.0) / base, 1e-9 * scale, N=n, check='bump',
                          u=u.values.tolist(), amplitudes=amplitudes.tolist())
            optimum = minimal_energy_derivatives(u)
            result.record(_relative(optimum, s.node_derivs), N=n, check='cvxpy', u=u.values.tolist())
    return result.to_dict()


def check_positivity(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0,
                     inject_fault: Optional[str] = None) -> Dict:
    """Nonnegative forcing gives a nonnegative discrete solution"""
    result = SuiteResult('positivity', 1e-15 * scale)
    kernels = {}
    for n in n_list:
        kernel = assemble_kernel_matrix(make_grid(n))
        kernels[n] = kernel.negated() if inject_fault == 'kernel-sign' else kernel
    for i in range(RANDOM_SAMPLES):
        n = int(n_list[i % len(n_list)])
        grid = make_grid(n)
        f = HomogeneousGridFunction.from_interior(grid, rng.uniform(0.0, 1.0, grid.size))
        u = solve_biharmonic(f, kernels[n])
        result.record(max(-float(np.min(u.values)), 0.0), N=n, f=f.values.tolist())
    if inject_fault:
        result.notes['injected_fault'] = inject_fault
    return result.to_dict()


def check_kernel_equalities(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Both K^h assemblies agree and K^h is the inverse of the DBO matrix"""
    result = SuiteResult('kernel_equalities', 1e-9 * scale)
    for n in n_list:
        grid = make_grid(n)
        sampled = assemble_kernel_matrix(grid).entries
        closed = assemble_kernel_closed_form(grid).entries
        dbo = assemble_dbo_matrix(grid).entries
        result.record(float(np.max(np.abs(sampled - closed))), 1e-14 * scale, N=n, check='closed_form')
        result.record(float(np.max(np.abs(sampled @ dbo - np.eye(grid.size)))), N=n, check='inverse')
    return result.to_dict()


def check_moment_solve(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Boundary moment solve reproduces the kernel-solve boundary values"""
    result = SuiteResult('moment_solve', 1e-8 * scale)
    usable = [n for n in n_list if n >= 3]
    if len(usable) < len(n_list):
        result.notes['skipped_N'] = [n for n in n_list if n < 3]
    for n in usable:
        grid = make_grid(n)
        for _ in range(5):
            f = HomogeneousGridFunction.from_interior(grid, rng.uniform(-1.0, 1.0, grid.size))
            moment = np.array(boundary_moment_solve(f))
            oracle = np.array(boundary_values_from_solve(f))
            deviation = max(_relative(moment[:2], oracle[:2]), _relative(moment[2:], oracle[2:]))
            result.record(deviation, N=n, f=f.values.tolist())
    return result.to_dict()


def check_traces(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """Gamma = 1/420, closed form of Gamma_h and sum of 1/lambda_h = Gamma_h"""
    result = SuiteResult('traces', 1e-12 * scale)
    result.record(abs(trace_gamma() - 1.0 / 420.0), 0.0, check='gamma')
    for n in n_list:
        grid = make_grid(n)
        direct = trace_gamma_h(grid)
        result.record(abs(direct - trace_gamma_h_closed_form(grid)), 1e-15 * scale, N=n, check='closed_form')
        result.record(abs(assemble_kernel_matrix(grid).trace() - direct) / direct, N=n, check='kernel_diagonal')
        spectral = float(np.sum(discrete_spectrum(grid).kernel_eigenvalues))
        result.record(abs(spectral - direct) / direct, N=n, check='spectral_sum')
    return result.to_dict()


def check_one_sided_bound(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0) -> Dict:
    """lambda_{h,1} never exceeds lambda_1 by more than roundoff"""
    result = SuiteResult('one_sided_bound', 1e-9 * scale)
    lam_1 = continuous_spectrum(1).lambda_(1)
    for n in n_list:
        excess = discrete_spectrum(make_grid(n)).lambda_h(1) - lam_1
        result.record(max(excess, 0.0), N=n)
    return result.to_dict()


def check_hs_inequality(n_list: Sequence[int], rng: np.random.Generator, scale: float = 1.0,
                        tail_terms: int = 200) -> Dict:
    """Squared inverse-eigenvalue distances are bounded by the squared HS distance"""
    result = SuiteResult('hs_inequality', 0.0)
    plateau = []
    for n in n_list:
        report = hs_inequality_check(make_grid(n), tail_terms=tail_terms)
        excess = max(report['left'][0] - report['right'], 0.0)
        result.record(excess, N=n, left=report['left'], right=report['right'])
        plateau.append({'N': n, 'right_over_h2': report['right_over_h2']})
    result.notes['plateau'] = plateau
    return result.to_dict()


SUITES: Dict[str, Callable] = {
    'hermitian_residual': check_hermitian_residual,
    'derivative_equality': check_derivative_equality,
    'jump_identity': check_jump_identity,
    'energy_identity': check_energy_identity,
    'second_derivative_forms': check_second_derivative_forms,
    'minimiser': check_minimiser,
    'positivity': check_positivity,
    'kernel_equalities': check_kernel_equalities,
    'moment_solve': check_moment_solve,
    'traces': check_traces,
    'one_sided_bound': check_one_sided_bound,
    'hs_inequality': check_hs_inequality,
}


def run_verification(n_list: Sequence[int], seed: int = 0, inject_fault: Optional[str] = None,
                     tolerance_scale: float = 1.0, tail_terms: int = 200,
                     suites: Optional[Sequence[str]] = None) -> List[Dict]:
    """
    Run the property suites on the given grid sizes

    Each suite draws from its own stream spawned from the seed, so results do
    not depend on which other suites run.

    Args:
        n_list: Grid sizes (N >= 2)
        seed: Seed for numpy's PCG64 generator
        inject_fault: 'kernel-sign' flips the sign of K^h in the positivity suite
        tolerance_scale: Multiplier applied to every tolerance
        tail_terms: Explicit tail roots for the HS inequality
        suites: Subset of SUITES to run (all by default)

    Returns:
        One result dict per suite, in SUITES order
    """
    n_list = sorted(set(int(n) for n in n_list))
    if not n_list or n_list[0] < 2:
        raise ValueError(f"Verification needs N values >= 2, got {n_list}")
    names = list(SUITES) if suites is None else list(suites)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suites: {unknown}")

    streams = np.random.SeedSequence(seed).spawn(len(SUITES))
    results = []
    for index, (name, suite) in enumerate(SUITES.items()):
        if name not in names:
            continue
        rng = np.random.default_rng(streams[index])
        logger.info(f"Running suite {name} on N={n_list}")
        if name == 'positivity':
            outcome = suite(n_list, rng, tolerance_scale, inject_fault=inject_fault)
        elif name == 'hs_inequality':
            outcome = suite(n_list, rng, tolerance_scale, tail_terms=tail_terms)
        else:
            outcome = suite(n_list, rng, tolerance_scale)
        results.append(outcome)
    return results


def first_failure(results: Sequence[Dict]) -> Optional[Dict]:
    return next((r for r in results if r['status'] != 'pass'), None)
