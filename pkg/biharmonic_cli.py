#!/usr/bin/env python3
"""
Biharmonic CLI - Command line front end
Solves, spectra, convergence studies and verification runs for the discrete
biharmonic operator on [0,1]. Data goes to stdout or --output, logs to stderr.

Exit codes: 0 success, 1 verification failure or slope outside band,
2 usage or input error.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

import numpy as np

from grid import HomogeneousGridFunction, make_grid, sample_interior
from kernel import assemble_kernel_matrix, probe_kernel, solve_biharmonic
from report_writer import round_floats, write_document, write_table
from spectra import continuous_spectrum, convergence_study, discrete_spectrum
from spline import build_spline
from study_config import (FAULTS, FORCINGS, FORMATS, KERNEL_MODES, PROFILES, StudyConfig,
                          load_env_file, parse_int_list)
from verification import first_failure, run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# Named forcings: f and the exact solution of u'''' = f, u = u' = 0 at both ends
NAMED_FORCINGS = {
    'zero': (lambda x: 0.0, lambda x: 0.0),
    'const24': (lambda x: 24.0, lambda x: x ** 2 * (1.0 - x) ** 2),
    'cos2pi': (lambda x: -8.0 * np.pi ** 4 * np.cos(2.0 * np.pi * x),
               lambda x: 0.5 * (1.0 - np.cos(2.0 * np.pi * x))),
}

NAMED_PROFILES = {
    'quartic': lambda x: x ** 2 * (1.0 - x) ** 2,
    'sine2': lambda x: np.sin(np.pi * x) ** 2,
}


def _single_n(config: StudyConfig) -> int:
    if len(config.n_list) != 1:
        raise ValueError(f"Command '{config.command}' takes a single N, got {config.n_list}")
    return config.n_list[0]


def read_node_values(path: str, n: int) -> HomogeneousGridFunction:
    """
    Read grid data from a text file, one value per line

    Either N+1 node values (the end values are dropped) or N-1 interior values.
    """
    values = np.loadtxt(path, dtype=np.float64, ndmin=1)
    grid = make_grid(n)
    if values.shape == (n + 1,):
        values = values[1:-1]
    if values.shape != (grid.size,):
        raise ValueError(f"{path}: expected {n + 1} or {n - 1} values, got {values.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite values")
    return HomogeneousGridFunction.from_interior(grid, values)


def cmd_solve(config: StudyConfig) -> int:
    """Solve delta_x^4 u = f for a named or file forcing"""
    n = _single_n(config)
    grid = make_grid(n)
    exact = None
    if config.forcing == 'file':
        f = read_node_values(config.input_file, n)
    else:
        forcing, exact = NAMED_FORCINGS[config.forcing]
        f = sample_interior(grid, forcing)

    u = solve_biharmonic(f)
    rows = []
    for x, value in zip(grid.nodes, u.values):
        row = {'x': float(x), 'u': float(value)}
        if exact is not None:
            row['u_exact'] = float(exact(float(x)))
            row['error'] = abs(row['u'] - row['u_exact'])
        rows.append(row)
    if exact is not None:
        logger.info(f"Max nodal error on N={n}: {max(r['error'] for r in rows):.3e}")
    write_table(rows, config.output_path(), config.fmt)
    return EXIT_OK


def cmd_eigs(config: StudyConfig) -> int:
    """Eigenvalue table: continuous lambda_k first, then one row per N"""
    k_max = max(config.k_list)
    for n in config.n_list:
        if k_max > n - 1:
            raise ValueError(f"k={k_max} exceeds N-1={n - 1}")
    spectrum = continuous_spectrum(k_max)
    rows = [dict([('N', 'true eigenvalue')] + [(f"lambda_{k}", spectrum.lambda_(k)) for k in config.k_list])]
    for n in config.n_list:
        logger.info(f"Discrete spectrum N={n}")
        discrete = discrete_spectrum(make_grid(n))
        rows.append(dict([('N', f"N={n}")] + [(f"lambda_{k}", discrete.lambda_h(k)) for k in config.k_list]))
    write_table(rows, config.output_path(), config.fmt)
    return EXIT_OK


def cmd_converge(config: StudyConfig) -> int:
    """Errors per (k, N) and the fitted log-log slope, checked against the band"""
    if len(config.n_list) < 3:
        raise ValueError(f"Convergence study needs at least 3 N values, got {config.n_list}")
    report = convergence_study(config.k_list, config.n_list)
    low, high = config.slope_band
    rows = [dict(row, slope=report.slopes[row['k']]) for row in report.rows]
    outside = [k for k, slope in report.slopes.items() if not low <= slope <= high]

    if config.fmt == 'json':
        write_document({'rows': report.rows, 'slopes': report.slope_rows(), 'band': [low, high]},
                       config.output_path())
    else:
        write_table(rows, config.output_path(), config.fmt)

    for k in outside:
        logger.warning(f"Slope for k={k} is {report.slopes[k]:.4f}, outside [{low}, {high}]")
    return EXIT_FAILED if outside else EXIT_OK


def cmd_verify(config: StudyConfig) -> int:
    """Run every property suite; exit 1 on the first failing suite"""
    results = run_verification(config.n_list, seed=config.seed, inject_fault=config.inject_fault,
                               tolerance_scale=config.tolerance_scale, tail_terms=config.tail_terms)
    if config.fmt == 'json':
        write_document(results, config.output_path())
    else:
        summary = [{k: r[k] for k in ('suite', 'status', 'checked', 'tolerance', 'max_deviation')}
                   for r in results]
        write_table(summary, config.output_path(), config.fmt)

    failure = first_failure(results)
    if failure is None:
        logger.info(f"All {len(results)} suites passed")
        return EXIT_OK
    sys.stderr.write(json.dumps(round_floats({'suite': failure['suite'],
                                              'counterexample': failure['counterexample']})) + '\n')
    return EXIT_FAILED


def cmd_spline(config: StudyConfig) -> int:
    """Samples of s, s', s'' for the clamped spline through the chosen data"""
    n = _single_n(config)
    grid = make_grid(n)
    if config.profile == 'file':
        u = read_node_values(config.input_file, n)
    else:
        u = sample_interior(grid, NAMED_PROFILES[config.profile])
    samples = build_spline(u).sample(config.points)
    rows = [{'x': x, 's': s, 's_d1': d1, 's_d2': d2}
            for x, s, d1, d2 in zip(samples['x'], samples['s'], samples['s_d1'], samples['s_d2'])]
    write_table(rows, config.output_path(), config.fmt)
    return EXIT_OK


def cmd_kernel(config: StudyConfig) -> int:
    """K^h in long format, or K on a probe grid"""
    if config.kernel_mode == 'probe':
        probe = probe_kernel(config.resolution)
        rows = [{'x': x, 'y': y, 'K': value} for x, y, value in zip(probe['x'], probe['y'], probe['K'])]
    else:
        grid = make_grid(_single_n(config))
        entries = assemble_kernel_matrix(grid).entries
        x = grid.interior
        rows = [{'i': i + 1, 'j': j + 1, 'x_i': x[i], 'x_j': x[j], 'Kh': entries[i, j]}
                for i in range(grid.size) for j in range(grid.size)]
    write_table(rows, config.output_path(), config.fmt)
    return EXIT_OK


COMMANDS = {
    'solve': cmd_solve,
    'eigs': cmd_eigs,
    'converge': cmd_converge,
    'verify': cmd_verify,
    'spline': cmd_spline,
    'kernel': cmd_kernel,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--output', '-o', help="Output file (stdout if omitted)")
    common.add_argument('--format', dest='fmt', choices=FORMATS, default='csv')
    common.add_argument('--verbose', '-v', action='store_true', help="Debug logging")
    common.add_argument('--quiet', '-q', action='store_true', help="Warnings only")

    parser = argparse.ArgumentParser(description="Discrete biharmonic calculus on [0,1]")
    sub = parser.add_subparsers(dest='command', required=True)

    solve = sub.add_parser('solve', parents=[common], help="Solve delta_x^4 u = f")
    solve.add_argument('--N', dest='n_list', default='16')
    solve.add_argument('--forcing', choices=FORCINGS, default='const24')
    solve.add_argument('--input', dest='input_file', help="Forcing values, one per line")

    eigs = sub.add_parser('eigs', parents=[common], help="Continuous and discrete eigenvalues")
    eigs.add_argument('--N', dest='n_list', default='10..60')
    eigs.add_argument('--k', dest='k_list', default='1,2,3,4')

    converge = sub.add_parser('converge', parents=[common], help="Eigenvalue convergence rate")
    converge.add_argument('--N', dest='n_list', default='10..60')
    converge.add_argument('--k', dest='k_list', default='1')
    converge.add_argument('--band', nargs=2, type=float, default=[-4.3, -3.7], metavar=('LOW', 'HIGH'))

    verify = sub.add_parser('verify', parents=[common], help="Run the property suites")
    verify.add_argument('--N', dest='n_list', default='4,8,16,32')
    verify.add_argument('--seed', type=int, default=0)
    verify.add_argument('--tolerance-scale', type=float, default=1.0)
    verify.add_argument('--tail-terms', type=int, default=200)
    verify.add_argument('--inject-fault', choices=FAULTS, help=argparse.SUPPRESS)

    spline = sub.add_parser('spline', parents=[common], help="Sample the clamped spline")
    spline.add_argument('--N', dest='n_list', default='8')
    spline.add_argument('--profile', choices=PROFILES, default='quartic')
    spline.add_argument('--input', dest='input_file', help="Node values, one per line")
    spline.add_argument('--points', type=int, default=101)

    kernel = sub.add_parser('kernel', parents=[common], help="Dump K^h or probe K")
    kernel.add_argument('--N', dest='n_list', default='8')
    kernel.add_argument('--mode', dest='kernel_mode', choices=KERNEL_MODES, default='matrix')
    kernel.add_argument('--resolution', type=int, default=64)
    return parser


def config_from_args(args: argparse.Namespace) -> StudyConfig:
    options: Dict = {'command': args.command, 'n_list': parse_int_list(args.n_list), 'fmt': args.fmt,
                     'output': args.output, 'verbosity': 1 if args.verbose else (-1 if args.quiet else 0)}
    if hasattr(args, 'k_list'):
        options['k_list'] = parse_int_list(args.k_list)
    if hasattr(args, 'band'):
        options['slope_band'] = tuple(args.band)
    for name in ('forcing', 'profile', 'input_file', 'seed', 'tolerance_scale', 'tail_terms',
                 'inject_fault', 'points', 'kernel_mode', 'resolution'):
        if getattr(args, name, None) is not None:
            options[name] = getattr(args, name)
    return StudyConfig(**options).validate()


def setup_logging(verbosity: int) -> None:
    level = logging.DEBUG if verbosity > 0 else (logging.WARNING if verbosity < 0 else logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s',
                        stream=sys.stderr, force=True)


def main(argv: Optional[List[str]] = None) -> int:
    load_env_file()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    setup_logging(1 if args.verbose else (-1 if args.quiet else 0))
    try:
        config = config_from_args(args)
        logger.info(f"Running {config.command} with N={config.n_list}")
        code = COMMANDS[config.command](config)
    except (ValueError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    logger.info(f"Finished {config.command} (exit {code})")
    return code


if __name__ == '__main__':
    sys.exit(main())
