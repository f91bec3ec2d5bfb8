"""
Command line entry point of the nanowire control laboratory.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np  # pylint: disable=import-error

from analytic_walls import wall_profile
from config import (
    ConfigError,
    ConfigKey,
    Constants,
    Defaults,
    Frame,
    Schema,
    Severity,
    load_config,
    resolve_out_dir,
    validate_settings,
)
from control_experiments import (
    AdmissibilityError,
    StageError,
    reduce_check,
    run_theorem1,
    sample_admissible_pair,
    sim_config_from_settings,
    track_wall,
    wall_residual_sweep,
)
from criteria import Criteria
from data_file_interaction import (
    diagnostics_arrays,
    read_spin_snapshot,
    reduce_check_arrays,
    report_arrays,
    residual_sweep_arrays,
    scalar_snapshot_arrays,
    snapshot_file_name,
    spectrum_arrays,
    spin_snapshot_arrays,
    write_data_file,
)
from decomposition_stability import spectral_report
from field_core import ControlSchedule, Grid, NanowireError, WallParams
from llg_dynamics import simulate
from log_utils import print_and_log
from record import CriterionResult

THREADPOOL = ThreadPoolExecutor()

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2


class _ArgumentParser(argparse.ArgumentParser):
    """
    Raises instead of exiting so that argument errors share the config error exit code
    """

    def error(self, message):
        raise ConfigError(message)


def _settings(args: argparse.Namespace) -> Dict[ConfigKey, Any]:
    """
    Config file values (or defaults) overridden by the grid flags
    """
    settings = load_config(args.config) if args.config else dict(Defaults.defaults)
    if getattr(args, "n", None) is not None:
        settings[ConfigKey.GRID_N] = args.n
    if getattr(args, "half_width", None) is not None:
        settings[ConfigKey.GRID_HALF_WIDTH] = args.half_width
    if getattr(args, "t_end", None) is not None:
        settings[ConfigKey.SIM_T_END] = args.t_end
    return validate_settings(settings)


def _grid(settings: Dict[ConfigKey, Any]) -> Grid:
    return Grid(settings[ConfigKey.GRID_HALF_WIDTH], settings[ConfigKey.GRID_N])


def _finish(results: Sequence[CriterionResult], out_dir: str) -> int:
    """
    Writes the report, prints one PASS/FAIL line per criterion and returns the exit code
    """
    write_data_file(os.path.join(out_dir, Schema.REPORT_FILE_NAME), report_arrays(results))
    for result in results:
        print(result.summary_line())
    return EXIT_PASS if all(result.passed for result in results) else EXIT_FAIL


def _run_simulate(args: argparse.Namespace) -> int:
    settings = _settings(args)
    out_dir = resolve_out_dir(args.out_dir, settings)
    t_end = settings[ConfigKey.SIM_T_END]
    delta = args.delta if args.delta is not None else settings[ConfigKey.SIM_DELTA]
    if args.initial:
        if not os.path.isfile(args.initial):
            raise ConfigError(f"Initial snapshot not found: {args.initial}")
        u0 = read_spin_snapshot(args.initial)
    else:
        u0 = wall_profile(WallParams(delta, args.theta, args.sigma), args.t_start, _grid(settings))
    cfg = sim_config_from_settings(settings, t_end, u0.grid)

    def wall_diagnostics(_time, u, _delta):
        estimate = track_wall(u)
        return {"sigma_est": estimate.sigma_est, "theta_est": estimate.theta_est}

    trajectory = simulate(
        u0,
        ControlSchedule.constant(delta),
        cfg,
        Frame(args.frame),
        diagnostics=wall_diagnostics,
        t_start=args.t_start,
    )
    for stamp, snapshot in zip(trajectory.times, trajectory.snapshots):
        write_data_file(
            os.path.join(out_dir, snapshot_file_name(stamp)), spin_snapshot_arrays(snapshot)
        )
    write_data_file(
        os.path.join(out_dir, Schema.DIAGNOSTICS_FILE_NAME),
        diagnostics_arrays(trajectory.diagnostics),
    )
    drift = max(record.norm_drift for record in trajectory.diagnostics)
    print(f"Simulated to t={trajectory.times[-1]:.6f}, max norm drift {drift:.3e}")
    return EXIT_PASS


def _run_verify_wall(args: argparse.Namespace) -> int:
    settings = _settings(args)
    out_dir = resolve_out_dir(args.out_dir, settings)
    half_width = settings[ConfigKey.GRID_HALF_WIDTH]
    for n_points in args.sizes:
        validate_settings({**settings, ConfigKey.GRID_N: n_points})
    grids = [Grid(half_width, n_points) for n_points in args.sizes]
    rows = wall_residual_sweep(args.deltas, grids, args.theta, args.sigma)
    write_data_file(
        os.path.join(out_dir, Schema.RESIDUAL_SWEEP_FILE_NAME), residual_sweep_arrays(rows)
    )
    results = [Criteria.WALL_RESIDUAL.evaluate(residual) for _, _, residual in rows]
    return _finish(results, out_dir)


def _run_reduce_check(args: argparse.Namespace) -> int:
    settings = _settings(args)
    out_dir = resolve_out_dir(args.out_dir, settings)
    grid = _grid(settings)
    rng = np.random.default_rng(settings[ConfigKey.SEED])
    worst = 0.0
    for sample in range(args.samples):
        pair = sample_admissible_pair(grid, rng)
        delta = args.delta if args.delta is not None else rng.uniform(-1.0, 1.0)
        reduced, projected, error = reduce_check(pair, delta)
        if sample == 0:
            write_data_file(
                os.path.join(out_dir, Schema.REDUCE_CHECK_FILE_NAME),
                reduce_check_arrays(projected, reduced),
            )
        worst = max(worst, error)
    return _finish([Criteria.REDUCTION_ERROR.evaluate(worst)], out_dir)


def _run_spectrum(args: argparse.Namespace) -> int:
    settings = _settings(args)
    out_dir = resolve_out_dir(args.out_dir, settings)
    n_points = settings[ConfigKey.GRID_N]
    if n_points > Constants.MAX_DENSE_POINTS:
        raise ConfigError(
            f"spectrum needs grid.n <= {Constants.MAX_DENSE_POINTS}, got {n_points}"
        )
    if not 2 <= args.k <= n_points - 2:
        raise ConfigError(f"-k = {args.k} must lie in [2, {n_points - 2}]")
    report = spectral_report(_grid(settings), args.k)
    write_data_file(
        os.path.join(out_dir, Schema.SPECTRUM_FILE_NAME),
        spectrum_arrays(report.eigenvalues, report.overlaps),
    )
    write_data_file(
        os.path.join(out_dir, Schema.KERNEL_MODE_FILE_NAME),
        scalar_snapshot_arrays(report.kernel_mode),
    )
    results = [
        Criteria.KERNEL_EIGENVALUE.evaluate(abs(report.kernel_eigenvalue)),
        Criteria.KERNEL_OVERLAP.evaluate(report.kernel_overlap),
        Criteria.SECOND_EIGENVALUE.evaluate(report.second_eigenvalue),
    ]
    return _finish(results, out_dir)


def _control_one(config_path: Optional[str], flag_out_dir: Optional[str]) -> int:
    settings = load_config(config_path) if config_path else dict(Defaults.defaults)
    out_dir = resolve_out_dir(flag_out_dir, settings)
    report = run_theorem1(settings, out_dir)
    for result in report.results:
        print(result.summary_line())
    return EXIT_PASS if report.passed else EXIT_FAIL


def _run_control(args: argparse.Namespace) -> int:
    if not args.sweep:
        return _control_one(args.config, args.out_dir)

    base = args.out_dir or os.getenv(Constants.OUT_DIR_ENV, Constants.DEFAULT_OUT_DIR)
    futures = []
    for config_path in args.sweep:
        name = os.path.splitext(os.path.basename(config_path))[0]
        out_dir = os.path.join(base, name)
        futures.append(THREADPOOL.submit(_control_one, config_path, out_dir))
    codes = [future.result() for future in futures]
    return max(codes)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        description="Simulates and verifies the controlled Landau-Lifschitz nanowire.",
    )
    parser.add_argument("--verbose", action="store_true", help="Log progress at INFO level.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_common(subparser, grid_flags=True):
        subparser.add_argument("--config", type=str, default=None, help="key=value config file.")
        subparser.add_argument("--out-dir", type=str, default=None, help="Output directory.")
        if grid_flags:
            subparser.add_argument("--n", type=int, default=None, help="Number of grid nodes.")
            subparser.add_argument(
                "--half-width", type=float, default=None, help="Half width X of the domain."
            )

    simulate_parser = subparsers.add_parser("simulate", help="Integrate a travelling wall.")
    add_common(simulate_parser)
    simulate_parser.add_argument("--t-end", type=float, default=None)
    simulate_parser.add_argument("--delta", type=float, default=None)
    simulate_parser.add_argument("--theta", type=float, default=0.0)
    simulate_parser.add_argument("--sigma", type=float, default=0.0)
    simulate_parser.add_argument(
        "--initial", type=str, default=None, help="Continue from a snap_<t>.csv spin snapshot."
    )
    simulate_parser.add_argument(
        "--t-start", type=float, default=0.0, help="Time of the initial field."
    )
    simulate_parser.add_argument(
        "--frame", choices=[frame.value for frame in Frame], default=Frame.LAB.value
    )
    simulate_parser.set_defaults(handler=_run_simulate)

    wall_parser = subparsers.add_parser("verify-wall", help="Travelling wall residual sweep.")
    add_common(wall_parser, grid_flags=False)
    wall_parser.add_argument("--half-width", type=float, default=None)
    wall_parser.add_argument("--deltas", type=float, nargs="+", default=[0.0, 0.05, 0.1])
    wall_parser.add_argument("--sizes", type=int, nargs="+", default=[257, 513, 1025])
    wall_parser.add_argument("--theta", type=float, default=0.0)
    wall_parser.add_argument("--sigma", type=float, default=0.0)
    wall_parser.set_defaults(handler=_run_verify_wall)

    reduce_parser = subparsers.add_parser("reduce-check", help="Reduced system oracle.")
    add_common(reduce_parser)
    reduce_parser.add_argument("--delta", type=float, default=None)
    reduce_parser.add_argument("--samples", type=int, default=20)
    reduce_parser.set_defaults(handler=_run_reduce_check)

    spectrum_parser = subparsers.add_parser("spectrum", help="Leading eigenvalues of L.")
    add_common(spectrum_parser)
    spectrum_parser.add_argument("-k", type=int, default=6)
    spectrum_parser.set_defaults(handler=_run_spectrum)

    control_parser = subparsers.add_parser("control", help="Wall steering experiment.")
    add_common(control_parser, grid_flags=False)
    control_parser.add_argument(
        "--sweep", type=str, nargs="+", default=None, help="Run several configs in parallel."
    )
    control_parser.set_defaults(handler=_run_control)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse the command line arguments and run the requested subcommand.
    @param argv (Optional[List[str]]): The arguments, sys.argv[1:] if None
    @return (int): 0 if every check passed, 1 if a tolerance failed, 2 for invalid input
    """
    try:
        args = _build_parser().parse_args(argv)
    except ConfigError as config_error:
        print(f"Invalid arguments: {config_error}", file=sys.stderr)
        return EXIT_INVALID

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.handler(args)
    except (ConfigError, AdmissibilityError) as invalid:
        print_and_log(str(invalid), Severity.INVALID)
        return EXIT_INVALID
    except (StageError, NanowireError) as failure:
        print_and_log(str(failure), Severity.MAJOR)
        print(f"FAIL {getattr(failure, 'stage', 'run')}: {failure}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
