"""
The wall steering experiment: planning of the two-level control, wall tracking, matching against
the travelling wall family and the end-to-end run with its report.
"""

import math
import os
import time
import traceback
from dataclasses import dataclass, field
from functools import wraps
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np  # pylint: disable=import-error
from scipy.interpolate import CubicSpline  # pylint: disable=import-error
from scipy.optimize import minimize_scalar  # pylint: disable=import-error
from scipy.stats import linregress  # pylint: disable=import-error

from analytic_walls import mobile_frame, sech, wall_profile
from config import (
    ConfigKey,
    Constants,
    Defaults,
    Frame,
    Schema,
    Severity,
    validate_settings,
)
from criteria import Criteria
from data_file_interaction import (
    diagnostics_arrays,
    report_arrays,
    snapshot_file_name,
    spin_snapshot_arrays,
    summary_arrays,
    write_data_file,
)
from decomposition_stability import (
    Decomposition,
    DecayFitError,
    decay_fit,
    decompose_field,
    lyapunov_v,
    perturbation_in_e,
    perturbed_wall,
)
from field_core import (
    ControlSchedule,
    Grid,
    NanowireError,
    PairField,
    SpinField,
    WallParams,
    h2_dist,
    h2_norm_pair,
)
from frame_reduction import lift_project_rhs, reduced_rhs
from llg_dynamics import SimConfig, Trajectory, residual_travelling_wall, simulate, to_moving_frame
from log_utils import print_and_log
from record import CriterionResult


class NoWallError(NanowireError):
    """
    u1 has no sign change from - to +
    """


class MultiWallError(NanowireError):
    """
    u1 changes sign more than once
    """


class AdmissibilityError(NanowireError):
    """
    Parameters outside the regime where the control law applies
    """


class StageError(NanowireError):
    """
    A stage of the steering experiment failed
    """

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(name: str):
    """
    Marks a function as a named stage of the steering experiment. Failures are logged with their
    traceback and re-raised as StageError naming the stage.
    @param name (str): The stage name
    @return: The decorator
    """

    def decorator(func):
        @wraps(func)
        def _wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except (NanowireError, ValueError, np.linalg.LinAlgError) as error:
                print_and_log(traceback.format_exc(), Severity.MAJOR, src=name)
                raise StageError(name, error) from error

        return _wrapper

    return decorator


def wrap_angle(angle: float) -> float:
    """
    The representative of an angle in (-pi, pi]
    """
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class ControlPlan:
    """
    The two-level control: delta1 on [0, T) and delta2 after T,
    with delta1 = delta2 - (sigma2 - sigma1)/T
    """

    sigma1: float
    sigma2: float
    delta1: float
    delta2: float
    T: float  # pylint: disable=invalid-name
    schedule: ControlSchedule
    delta0_bound: float


def snap_up(value: float, dt: float) -> float:
    """
    The smallest positive multiple m*dt not below value
    """
    multiple = max(1, int(math.ceil(value / dt - 1e-9)))
    return multiple * dt


def _admissible(level: float, bound: float) -> bool:
    return abs(level) <= bound * (1.0 + 1e-12)


def plan_control(
    sigma1: float,
    sigma2: float,
    delta2: float,
    delta0_bound: float,
    dt: float,
    T_hint: Optional[float] = None,  # pylint: disable=invalid-name
    safety_factor: float = 2.0,
) -> ControlPlan:
    """
    Chooses the switch time T and the first level delta2 - (sigma2 - sigma1)/T. T is the hint
    when it is admissible, otherwise the smallest admissible T times safety_factor, and is always
    a multiple of dt.
    @param sigma1 (float): Initial wall position
    @param sigma2 (float): Target wall position
    @param delta2 (float): Field after the switch, |delta2| <= delta0_bound
    @param delta0_bound (float): Admissibility bound on both levels
    @param dt (float): The integrator time step
    @param T_hint (Optional[float]): Requested switch time
    @param safety_factor (float): Multiplier applied to the minimal switch time
    @return (ControlPlan): The plan and its schedule
    """
    if abs(delta2) > delta0_bound:
        raise AdmissibilityError(
            f"|delta2| = {abs(delta2)} exceeds the admissible bound delta0 = {delta0_bound}"
        )
    shift = sigma2 - sigma1

    switch_time = None
    if T_hint is not None:
        snapped = snap_up(T_hint, dt)
        if T_hint > 0 and _admissible(delta2 - shift / snapped, delta0_bound):
            switch_time = snapped
        else:
            print_and_log(
                f"Switch time hint {T_hint} is not admissible, choosing T automatically",
                Severity.MINOR,
            )

    if switch_time is None:
        if shift > 0:
            margin = delta2 + delta0_bound
        elif shift < 0:
            margin = delta0_bound - delta2
        else:
            margin = math.inf
        if margin <= 0:
            raise AdmissibilityError(
                f"No switch time moves the wall by {shift} with delta2 = {delta2} "
                f"and delta0 = {delta0_bound}"
            )
        switch_time = snap_up(abs(shift) / margin * safety_factor, dt)

    first_level = delta2 - shift / switch_time
    schedule = ControlSchedule((switch_time,), (first_level,), delta2)
    return ControlPlan(sigma1, sigma2, first_level, delta2, switch_time, schedule, delta0_bound)


@dataclass(frozen=True)
class WallEstimate:
    """
    Position of the u1 zero crossing and the phase of (u2, u3) there
    """

    sigma_est: float
    theta_est: float


def track_wall(u: SpinField) -> WallEstimate:
    """
    Locates the single - to + sign change of u1. The bracketing cell comes from the sign pattern,
    the crossing from a local cubic spline of u1 (linear interpolation if the spline has no root
    in the cell), and the phase from atan2(-u2, u3) interpolated linearly at the crossing.
    @param u (SpinField): A single-wall field
    @return (WallEstimate): The wall position and phase
    """
    nodes = u.grid.nodes
    first = u.values[:, 0]
    positive = first >= 0.0
    changes = np.flatnonzero(positive[1:] != positive[:-1])
    if len(changes) == 0:
        raise NoWallError("u1 does not change sign")
    if len(changes) > 1:
        raise MultiWallError(f"u1 changes sign {len(changes)} times")
    index = int(changes[0])
    if positive[index]:
        raise NoWallError("u1 changes sign from + to -; expected a single - to + wall")

    fraction = first[index] / (first[index] - first[index + 1])
    low, high = max(0, index - 2), min(len(nodes), index + 4)
    spline = CubicSpline(nodes[low:high], first[low:high])
    roots = spline.roots(extrapolate=False)
    roots = roots[(roots >= nodes[index]) & (roots <= nodes[index + 1])]
    if len(roots) > 0:
        fraction = (roots[0] - nodes[index]) / u.grid.spacing

    sigma_est = nodes[index] + fraction * u.grid.spacing
    second = (1.0 - fraction) * u.values[index, 1] + fraction * u.values[index + 1, 1]
    third = (1.0 - fraction) * u.values[index, 2] + fraction * u.values[index + 1, 2]
    theta_est = wrap_angle(math.atan2(-second, third))
    return WallEstimate(float(sigma_est), theta_est)


def unwrap_phase(series: Sequence[float]) -> np.ndarray:
    """
    Nearest-branch continuation of a wrapped phase series
    """
    return np.unwrap(np.asarray(series, dtype=float))


def fit_slope(times: Sequence[float], values: Sequence[float]) -> float:
    """
    Least-squares slope of values against times
    """
    return float(linregress(times, values).slope)


def best_matching_profile(
    u: SpinField, delta: float, t: float, sigma_target: float
) -> Tuple[float, float]:
    """
    Minimises theta -> h2_dist(u, u^{delta, theta, sigma_target}(t)) by golden section search
    seeded at the tracked phase
    @param u (SpinField): A single-wall field
    @param delta (float): The field of the target profile
    @param t (float): The time of the target profile
    @param sigma_target (float): The translation of the target profile
    @return (Tuple[float, float]): The best theta in (-pi, pi] and its distance
    """
    seed = track_wall(u).theta_est - delta * t

    def distance(theta: float) -> float:
        return h2_dist(u, wall_profile(WallParams(delta, theta, sigma_target), t, u.grid))

    result = minimize_scalar(
        distance,
        bracket=(seed - 0.1, seed + 0.1),
        method="golden",
        options={"xtol": 1e-12, "maxiter": 200},
    )
    return wrap_angle(float(result.x)), float(result.fun)


class NominalFrameTracker:
    """
    Diagnostics callback recording the wall estimate and the decomposition of the field seen
    from the nominal controlled wall R_{theta1 + phi(t)} M0(x + phi(t) - sigma1),
    phi the accumulated control
    """

    def __init__(self, grid: Grid, schedule: ControlSchedule, theta1: float, sigma1: float):
        self.frame = mobile_frame(grid)
        self.schedule = schedule
        self.theta1 = theta1
        self.sigma1 = sigma1
        self.times: List[float] = []
        self.decompositions: List[Decomposition] = []
        self._last: Dict[str, float] = {}

    def moving_field(self, t: float, u: SpinField) -> SpinField:
        """
        The field with the nominal rotation and translation removed
        """
        phase = self.schedule.accumulated(t)
        return to_moving_frame(u, self.theta1 + phase, phase - self.sigma1)

    def __call__(self, t: float, u: SpinField, delta: float) -> Dict[str, float]:
        if self.times and t == self.times[-1]:
            return self._last
        estimate = track_wall(u)
        decomposition = decompose_field(self.moving_field(t, u), self.frame)
        self.times.append(t)
        self.decompositions.append(decomposition)
        self._last = {
            "sigma_est": estimate.sigma_est,
            "theta_est": estimate.theta_est,
            "w_h2": h2_norm_pair(decomposition.W),
            "lyapunov": lyapunov_v(decomposition.W),
        }
        return self._last

    def remainder_series(
        self, start: float, end: float
    ) -> Tuple[np.ndarray, List[PairField]]:
        """
        Times in [start, end] relative to start and W - W(end) at each of them
        """
        picked = [
            (t, decomposition.W)
            for t, decomposition in zip(self.times, self.decompositions)
            if start <= t <= end
        ]
        final = picked[-1][1]
        times = np.array([t - start for t, _ in picked])
        return times, [remainder - final for _, remainder in picked]


@dataclass
class ExperimentReport:
    """
    Outcome of the steering experiment
    """

    distance_initial: float
    distance_at_T: float  # pylint: disable=invalid-name
    theta2: float
    sigma2: float
    theta2_limit: float
    sigma2_limit: float
    lambda_error: float
    decay_rate: float
    decay_r_squared: float
    switch_time: float
    limit_distance_increase: float = math.nan
    results: List[CriterionResult] = field(default_factory=list)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        """
        True when every evaluated criterion passed
        """
        return all(result.passed for result in self.results)

    def summary(self) -> List[Tuple[str, float]]:
        """
        The measured quantities as (name, value) rows, without the runtime which differs
        between reruns
        """
        names = (
            "distance_initial",
            "distance_at_T",
            "theta2",
            "sigma2",
            "theta2_limit",
            "sigma2_limit",
            "lambda_error",
            "decay_rate",
            "decay_r_squared",
            "switch_time",
            "limit_distance_increase",
        )
        return [(name, float(getattr(self, name))) for name in names]


def _setting(settings: Dict[ConfigKey, Any], key: ConfigKey) -> Any:
    return settings.get(key, Defaults.defaults[key])


@_stage("initial")
def _initial_field(grid: Grid, amplitude: float, seed: int, theta1: float, sigma1: float):
    perturbation = perturbation_in_e(grid, amplitude, seed)
    return perturbed_wall(perturbation, theta1, sigma1)


@_stage("plan")
def _plan(settings: Dict[ConfigKey, Any], dt: float) -> ControlPlan:
    return plan_control(
        _setting(settings, ConfigKey.CTRL_SIGMA1),
        _setting(settings, ConfigKey.CTRL_SIGMA2),
        _setting(settings, ConfigKey.CTRL_DELTA2),
        _setting(settings, ConfigKey.CTRL_DELTA0),
        dt,
        _setting(settings, ConfigKey.CTRL_T),
        _setting(settings, ConfigKey.CTRL_SAFETY_FACTOR),
    )


@_stage("simulate")
def _simulate_segment(u0, schedule, cfg, tracker, t_start) -> Trajectory:
    return simulate(u0, schedule, cfg, Frame.LAB, diagnostics=tracker, t_start=t_start)


@_stage("match")
def _match(u_switch: SpinField, plan: ControlPlan) -> Tuple[float, float]:
    return best_matching_profile(u_switch, plan.delta2, plan.T, plan.sigma2)


@_stage("decay-fit")
def _fit_remainder_decay(
    tracker: NominalFrameTracker, start: float, end: float, skip: float, stop: float
) -> Tuple[float, float]:
    times, remainders = tracker.remainder_series(start, end)
    # the last sample is the reference and vanishes identically
    times, remainders = times[:-1], remainders[:-1]
    values = np.array([h2_norm_pair(remainder) for remainder in remainders])
    if len(values) == 0 or np.max(values) <= Constants.DEGENERATE_NORM:
        raise DecayFitError("No remainder left to fit")
    return decay_fit(times, values, skip, stop)


def _check_regime(settings: Dict[ConfigKey, Any]) -> None:
    delta0 = _setting(settings, ConfigKey.CTRL_DELTA0)
    for key in (ConfigKey.CTRL_DELTA1, ConfigKey.CTRL_DELTA2):
        if abs(_setting(settings, key)) > delta0:
            raise AdmissibilityError(
                f"|{key.key}| = {abs(_setting(settings, key))} exceeds delta0 = {delta0}"
            )
    epsilon = _setting(settings, ConfigKey.CTRL_EPSILON)
    epsilon0 = _setting(settings, ConfigKey.CTRL_EPSILON0)
    if epsilon > epsilon0:
        raise AdmissibilityError(f"epsilon = {epsilon} exceeds epsilon0 = {epsilon0}")
    if _setting(settings, ConfigKey.CTRL_PERTURBATION) > epsilon:
        raise AdmissibilityError("The initial perturbation is larger than epsilon")


def sim_config_from_settings(
    settings: Dict[ConfigKey, Any], t_end: float, grid: Optional[Grid] = None
) -> SimConfig:
    """
    Integration settings for a run of length t_end from the loaded config
    """
    grid = grid or Grid(
        _setting(settings, ConfigKey.GRID_HALF_WIDTH), _setting(settings, ConfigKey.GRID_N)
    )
    return SimConfig.from_cfl(
        grid,
        t_end,
        _setting(settings, ConfigKey.SIM_DT_CFL),
        _setting(settings, ConfigKey.SIM_OUTPUT_INTERVAL),
        _setting(settings, ConfigKey.SIM_RENORMALIZE_EVERY),
    )


def run_theorem1(
    settings: Dict[ConfigKey, Any], out_dir: Optional[str] = None
) -> ExperimentReport:
    """
    Steers a wall from (theta1, sigma1) towards position sigma2 with the two-level control:
    builds the perturbed initial wall, plans the control, integrates up to the switch time,
    matches the best target profile, integrates the post horizon while decomposing the field
    and reports the criteria
    @param settings (Dict[ConfigKey, Any]): The loaded config
    @param out_dir (Optional[str]): Directory for the CSV outputs, nothing written if None
    @return (ExperimentReport): The measured quantities and criteria
    """
    started = time.perf_counter()
    validate_settings(settings)
    _check_regime(settings)
    epsilon = _setting(settings, ConfigKey.CTRL_EPSILON)
    theta1 = _setting(settings, ConfigKey.CTRL_THETA1)
    sigma1 = _setting(settings, ConfigKey.CTRL_SIGMA1)
    delta1 = _setting(settings, ConfigKey.CTRL_DELTA1)

    post_horizon = _setting(settings, ConfigKey.CTRL_POST_HORIZON)
    post_config = sim_config_from_settings(settings, post_horizon)
    grid = post_config.grid
    u0 = _initial_field(
        grid,
        _setting(settings, ConfigKey.CTRL_PERTURBATION),
        _setting(settings, ConfigKey.SEED),
        theta1,
        sigma1,
    )
    distance_initial = h2_dist(u0, wall_profile(WallParams(delta1, theta1, sigma1), 0.0, grid))

    plan = _plan(settings, post_config.dt)
    print_and_log(
        f"Control plan: delta = {plan.delta1:.6g} on [0, {plan.T:.6f}), then {plan.delta2:.6g}",
        Severity.INFO,
    )
    tracker = NominalFrameTracker(grid, plan.schedule, theta1, sigma1)
    pre_config = sim_config_from_settings(settings, plan.T, grid)
    before = _simulate_segment(u0, plan.schedule, pre_config, tracker, 0.0)
    theta2, distance_at_switch = _match(before.final, plan)
    after = _simulate_segment(before.final, plan.schedule, post_config, tracker, plan.T)

    limit = tracker.decompositions[-1]
    shift = plan.sigma2 - plan.sigma1
    theta2_limit = wrap_angle(theta1 - shift + limit.theta)
    sigma2_limit = plan.sigma2 + limit.sigma
    lambda_error = abs(wrap_angle(theta2_limit - theta2)) + abs(sigma2_limit - plan.sigma2)
    increase = limit_distance_increase(
        after,
        WallParams(plan.delta2, theta2_limit, sigma2_limit),
        plan.T + Constants.LIMIT_TRANSIENT,
    )

    skip = _setting(settings, ConfigKey.CTRL_DECAY_SKIP)
    stop = _setting(settings, ConfigKey.CTRL_DECAY_STOP)
    if plan.T >= stop:
        segment = (0.0, plan.T)
    else:
        segment = (plan.T, after.times[-1])
    decay_rate, decay_r_squared = math.nan, math.nan
    try:
        decay_rate, decay_r_squared = _fit_remainder_decay(tracker, *segment, skip, stop)
    except StageError as stage_error:
        if not isinstance(stage_error.cause, DecayFitError):
            raise
        print_and_log(f"W decay not measurable: {stage_error.cause}", Severity.MINOR)

    results = [
        Criteria.DISTANCE_AT_T.evaluate(distance_at_switch, epsilon),
        Criteria.LAMBDA_LIMIT.evaluate(lambda_error, epsilon),
    ]
    if not math.isnan(decay_rate):
        results.append(Criteria.W_DECAY_RATE.evaluate(decay_rate))

    report = ExperimentReport(
        distance_initial=distance_initial,
        distance_at_T=distance_at_switch,
        theta2=theta2,
        sigma2=plan.sigma2,
        theta2_limit=theta2_limit,
        sigma2_limit=sigma2_limit,
        lambda_error=lambda_error,
        decay_rate=decay_rate,
        decay_r_squared=decay_r_squared,
        switch_time=plan.T,
        limit_distance_increase=increase,
        results=results,
    )
    if out_dir is not None:
        records = before.diagnostics + after.diagnostics[1:]
        write_data_file(
            os.path.join(out_dir, Schema.DIAGNOSTICS_FILE_NAME), diagnostics_arrays(records)
        )
        write_data_file(os.path.join(out_dir, Schema.REPORT_FILE_NAME), report_arrays(results))
        write_data_file(
            os.path.join(out_dir, Schema.SUMMARY_FILE_NAME), summary_arrays(report.summary())
        )
        for stamp, snapshot in ((0.0, u0), (plan.T, before.final), (after.times[-1], after.final)):
            write_data_file(
                os.path.join(out_dir, snapshot_file_name(stamp)), spin_snapshot_arrays(snapshot)
            )
    report.runtime = time.perf_counter() - started
    print_and_log(
        f"Steering experiment finished in {report.runtime:.1f} s, "
        f"{'PASS' if report.passed else 'FAIL'}",
        Severity.INFO,
    )
    return report


def limit_distance_increase(
    trajectory: Trajectory, limit: WallParams, start: float
) -> float:
    """
    Largest rise of h2_dist(u(t), u^{limit}(t)) between consecutive snapshots from start on
    @param trajectory (Trajectory): The sampled run
    @param limit (WallParams): The travelling wall the run settles onto
    @param start (float): First time considered
    @return (float): The largest increase, negative when the distance only falls, nan with
        fewer than two snapshots
    """
    distances = [
        h2_dist(snapshot, wall_profile(limit, stamp, snapshot.grid))
        for stamp, snapshot in zip(trajectory.times, trajectory.snapshots)
        if stamp >= start
    ]
    if len(distances) < 2:
        return math.nan
    return float(np.max(np.diff(distances)))


def wall_residual_sweep(
    deltas: Iterable[float], grids: Iterable[Grid], theta: float = 0.0, sigma: float = 0.0
) -> List[Tuple[float, int, float]]:
    """
    Travelling wall residuals for every (delta, grid) pair
    @return (List[Tuple[float, int, float]]): Rows (delta, n_points, residual)
    """
    grids = list(grids)
    return [
        (delta, grid.n_points, residual_travelling_wall(WallParams(delta, theta, sigma), grid))
        for delta in deltas
        for grid in grids
    ]


def sample_admissible_pair(grid: Grid, rng: np.random.Generator, scale: float = 0.1) -> PairField:
    """
    Random smooth coordinates decaying like sech, well inside |r|^2 <= 1/2
    """
    nodes = grid.nodes
    components = []
    for _ in range(2):
        centre = rng.uniform(-3.0, 3.0)
        width = rng.uniform(0.8, 2.5)
        components.append(scale * rng.uniform(-1.0, 1.0) * sech((nodes - centre) / width))
    return PairField.from_arrays(grid, *components)


def reduce_check(r: PairField, delta: float) -> Tuple[PairField, PairField, float]:
    """
    Compares the reduced right-hand side with the projection of the moving frame equation on
    the lifted field
    @return (Tuple[PairField, PairField, float]): reduced, projected and the largest nodal error
    """
    reduced, _ = reduced_rhs(r, delta)
    projected = lift_project_rhs(r, delta)
    error = float(np.max(np.abs(reduced.stack() - projected.stack())))
    return reduced, projected, error
