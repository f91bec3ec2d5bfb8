"""
Right-hand sides of the controlled Landau-Lifschitz equation in the lab frame and in the
moving frame, the projected Runge-Kutta integrator and the travelling wall residual.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np  # pylint: disable=import-error

from analytic_walls import wall_profile, wall_velocity
from config import Constants, Frame, Severity
from field_core import (
    E1,
    ControlSchedule,
    Grid,
    NanowireError,
    SpinField,
    WallParams,
    d1_array,
    d2_array,
    norm_drift,
    sphere_project,
    symmetry_action,
)
from log_utils import print_and_log

DiagnosticsCallback = Callable[[float, SpinField, float], Dict[str, float]]


class BlowUpError(NanowireError):
    """
    The integrator left the sphere by more than the blow-up tolerance
    """

    def __init__(self, time: float, deviation: float):
        super().__init__(
            f"Blow-up at t={time:.6f}: nodal norm deviates from 1 by {deviation:.3e}, "
            "reduce the time step"
        )
        self.time = time
        self.deviation = deviation


@dataclass(frozen=True)
class SimConfig:
    """
    Fixed-step integration settings. dt must satisfy dt <= cfl_factor * h^2 with
    cfl_factor <= CFL_MAX.
    """

    grid: Grid
    dt: float
    t_end: float
    cfl_factor: float = 0.25
    renormalize_every: int = 1
    output_stride: int = 1

    def __post_init__(self):
        if self.cfl_factor > Constants.CFL_MAX:
            raise ValueError(f"CFL factor {self.cfl_factor} exceeds {Constants.CFL_MAX}")
        # tiny slack so that dt computed as c*h^2 always passes
        if not 0 < self.dt <= self.cfl_factor * self.grid.spacing**2 * (1 + 1e-12):
            raise ValueError(
                f"Time step {self.dt} violates dt <= {self.cfl_factor} h^2 "
                f"= {self.cfl_factor * self.grid.spacing ** 2}"
            )
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.renormalize_every < 1 or self.output_stride < 1:
            raise ValueError("renormalize_every and output_stride must be at least 1")

    @classmethod
    def from_cfl(
        cls,
        grid: Grid,
        t_end: float,
        cfl_factor: float = 0.25,
        output_interval: Optional[float] = None,
        renormalize_every: int = 1,
    ) -> "SimConfig":
        """
        Settings with dt = cfl_factor * h^2 and an output stride covering output_interval
        @param grid (Grid): The grid
        @param t_end (float): The final time
        @param cfl_factor (float): The CFL factor c
        @param output_interval (Optional[float]): Time between outputs, every step if None
        @param renormalize_every (int): Steps between sphere projections
        @return (SimConfig): The settings
        """
        dt = cfl_factor * grid.spacing**2
        stride = 1 if output_interval is None else max(1, int(round(output_interval / dt)))
        return cls(grid, dt, t_end, cfl_factor, renormalize_every, stride)

    @property
    def n_steps(self) -> int:
        """
        Number of steps needed to reach t_end
        """
        return int(math.ceil(self.t_end / self.dt - 1e-9))


@dataclass
class DiagnosticsRecord:
    """
    One row of the trajectory diagnostics
    """

    t: float
    delta: float
    norm_drift: float
    sigma_est: float = math.nan
    theta_est: float = math.nan
    w_h2: float = math.nan
    lyapunov: float = math.nan

    def as_row(self) -> List[float]:
        """
        The record in diagnostics column order
        """
        return [
            self.t,
            self.delta,
            self.norm_drift,
            self.sigma_est,
            self.theta_est,
            self.w_h2,
            self.lyapunov,
        ]


@dataclass
class Trajectory:
    """
    Snapshots at every output stride and the matching diagnostics
    """

    times: List[float] = field(default_factory=list)
    snapshots: List[SpinField] = field(default_factory=list)
    diagnostics: List[DiagnosticsRecord] = field(default_factory=list)

    @property
    def final(self) -> SpinField:
        """
        The last snapshot
        """
        return self.snapshots[-1]


def _effective_field_array(values: np.ndarray, spacing: float) -> np.ndarray:
    field_values = d2_array(values, spacing)
    field_values[:, 1:] -= values[:, 1:]
    return field_values


def effective_field(u: SpinField) -> np.ndarray:
    """
    h(u) = u_xx - u2 e2 - u3 e3
    @param u (SpinField): The magnetization
    @return (np.ndarray): The (N, 3) effective field
    """
    return _effective_field_array(u.values, u.grid.spacing)


def _precession_damping(values: np.ndarray, driving: np.ndarray) -> np.ndarray:
    """
    -u x a - u x (u x a)
    """
    torque = np.cross(values, driving)
    return -torque - np.cross(values, torque)


def _rhs_lab_array(values: np.ndarray, delta: float, spacing: float) -> np.ndarray:
    rhs = _precession_damping(values, _effective_field_array(values, spacing))
    if delta != 0.0:
        # -delta (u x e1 + u x (u x e1))
        rhs += delta * _precession_damping(values, E1)
    return rhs


def _rhs_moving_array(values: np.ndarray, delta: float, spacing: float) -> np.ndarray:
    return rhs_moving_pointwise(
        values, d1_array(values, spacing), _effective_field_array(values, spacing), delta
    )


def rhs_lab(u: SpinField, delta: float) -> np.ndarray:
    """
    u_t = -u x h(u) - u x (u x h(u)) - delta (u x e1 + u x (u x e1))
    @param u (SpinField): The magnetization
    @param delta (float): The applied field
    @return (np.ndarray): The (N, 3) time derivative
    """
    return _rhs_lab_array(u.values, delta, u.grid.spacing)


def rhs_moving_pointwise(
    v: np.ndarray, v_x: np.ndarray, h_v: np.ndarray, delta: float
) -> np.ndarray:
    """
    Moving frame right-hand side from supplied samples of v, v_x and h(v)
    @param v (np.ndarray): (N, 3) samples of v
    @param v_x (np.ndarray): (N, 3) samples of v_x
    @param h_v (np.ndarray): (N, 3) samples of the effective field h(v)
    @param delta (float): The applied field
    @return (np.ndarray): The (N, 3) time derivative
    """
    advection = v_x + v[:, :1] * v - E1
    return _precession_damping(v, h_v) - delta * advection


def rhs_moving(v: SpinField, delta: float) -> np.ndarray:
    """
    v_t = -v x h(v) - v x (v x h(v)) - delta (v_x + v1 v - e1)
    @param v (SpinField): The magnetization seen from the moving frame
    @param delta (float): The applied field
    @return (np.ndarray): The (N, 3) time derivative
    """
    return _rhs_moving_array(v.values, delta, v.grid.spacing)


_RHS = {Frame.LAB: _rhs_lab_array, Frame.MOVING: _rhs_moving_array}


def _rk4_unprojected(
    values: np.ndarray, delta: float, dt: float, spacing: float, frame: Frame
) -> np.ndarray:
    rhs = _RHS[frame]
    k1 = rhs(values, delta, spacing)
    k2 = rhs(values + 0.5 * dt * k1, delta, spacing)
    k3 = rhs(values + 0.5 * dt * k2, delta, spacing)
    k4 = rhs(values + dt * k3, delta, spacing)
    return values + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_blow_up(values: np.ndarray, time: float) -> None:
    if not np.all(np.isfinite(values)):
        raise BlowUpError(time, math.inf)
    deviation = norm_drift(values)
    if deviation > Constants.BLOWUP_NORM_DEVIATION:
        raise BlowUpError(time, deviation)


def step(u: SpinField, delta: float, dt: float, frame: Frame = Frame.LAB) -> SpinField:
    """
    One classical RK4 step followed by projection of every node onto the sphere
    @param u (SpinField): The current field
    @param delta (float): The applied field, frozen over the step
    @param dt (float): The time step
    @param frame (Frame): Lab or moving frame equation
    @return (SpinField): The field after one step
    """
    values = _rk4_unprojected(u.values, delta, dt, u.grid.spacing, frame)
    _check_blow_up(values, dt)
    return SpinField(u.grid, sphere_project(values))


def simulate(
    u0: SpinField,
    schedule: ControlSchedule,
    cfg: SimConfig,
    frame: Frame = Frame.LAB,
    diagnostics: Optional[DiagnosticsCallback] = None,
    t_start: float = 0.0,
) -> Trajectory:
    """
    Fixed-step integration of the controlled equation. delta is sampled right-continuously at
    the base time of each step, and every output stride (and the final step) stores a snapshot
    and a diagnostics record.
    @param u0 (SpinField): The initial field
    @param schedule (ControlSchedule): The control t -> delta(t)
    @param cfg (SimConfig): Integration settings
    @param frame (Frame): Lab or moving frame equation
    @param diagnostics (Optional[DiagnosticsCallback]): Called as (t, u, delta) at each output,
        returns any of sigma_est, theta_est, w_h2, lyapunov
    @param t_start (float): Time of the initial field; the run covers [t_start, t_start + t_end]
    @return (Trajectory): The sampled trajectory
    """
    if u0.grid != cfg.grid:
        raise ValueError("Initial field and simulation config use different grids")

    trajectory = Trajectory()
    values = np.array(u0.values)
    spacing = cfg.grid.spacing
    n_steps = cfg.n_steps

    def record(step_index: int, field_values: np.ndarray) -> None:
        time = t_start + step_index * cfg.dt
        delta = schedule(time)
        snapshot = SpinField(cfg.grid, field_values)
        entry = DiagnosticsRecord(time, delta, norm_drift(field_values))
        if diagnostics is not None:
            for name, value in diagnostics(time, snapshot, delta).items():
                setattr(entry, name, float(value))
        trajectory.times.append(time)
        trajectory.snapshots.append(snapshot)
        trajectory.diagnostics.append(entry)

    print_and_log(
        f"Simulating {n_steps} steps of dt={cfg.dt:.3e} on N={cfg.grid.n_points} "
        f"({frame.value} frame)",
        Severity.INFO,
    )
    record(0, values)
    for step_index in range(1, n_steps + 1):
        base_time = t_start + (step_index - 1) * cfg.dt
        values = _rk4_unprojected(values, schedule(base_time), cfg.dt, spacing, frame)
        try:
            _check_blow_up(values, t_start + step_index * cfg.dt)
        except BlowUpError as blow_up:
            print_and_log(str(blow_up), Severity.MAJOR)
            raise
        is_output = step_index % cfg.output_stride == 0 or step_index == n_steps
        if is_output or step_index % cfg.renormalize_every == 0:
            values = sphere_project(values)
        if is_output:
            record(step_index, values)
    return trajectory


def to_moving_frame(u: SpinField, phase: float, shift: float) -> SpinField:
    """
    v(x) = R_{-phase} u(x - shift)
    """
    return symmetry_action(u, -phase, shift)


def residual_travelling_wall(p: WallParams, grid: Grid, t: float = 0.0) -> float:
    """
    Sup norm of d/dt u - rhs_lab(u, delta) on the travelling wall, with the time derivative
    delta (e1 x u + u_x) built from the closed form and a discrete u_x
    @param p (WallParams): The wall parameters
    @param grid (Grid): The grid
    @param t (float): The time at which the profile is sampled
    @return (float): The maximum nodal norm of the residual
    """
    profile = wall_profile(p, t, grid)
    residual = wall_velocity(p, t, grid, discrete_slope=True) - rhs_lab(profile, p.delta)
    return float(np.max(np.linalg.norm(residual, axis=1)))
