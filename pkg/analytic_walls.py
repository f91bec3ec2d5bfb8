"""
Closed-form objects of the nanowire model: the wall M0, the mobile frame (M0, M1, M2) with its
exact derivatives, and the travelling wall family u^{delta,theta,sigma}.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np  # pylint: disable=import-error

from config import Constants
from field_core import E1, E2, Grid, SpinField, WallParams, d1_array, rotate

ArrayLike = Union[float, np.ndarray]


def th(x: ArrayLike) -> np.ndarray:
    """
    Hyperbolic tangent, clamped to +-1 beyond the hyperbolic clamp
    """
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) > Constants.HYPERBOLIC_CLAMP, np.sign(x), np.tanh(x))


def sech(x: ArrayLike) -> np.ndarray:
    """
    1/ch x, clamped to 0 beyond the hyperbolic clamp
    """
    x = np.asarray(x, dtype=float)
    clipped = np.clip(x, -Constants.HYPERBOLIC_CLAMP, Constants.HYPERBOLIC_CLAMP)
    return np.where(np.abs(x) > Constants.HYPERBOLIC_CLAMP, 0.0, 1.0 / np.cosh(clipped))


def _stack(first: ArrayLike, second: ArrayLike, third: ArrayLike) -> np.ndarray:
    first, second, third = np.broadcast_arrays(first, second, third)
    return np.stack((first, second, third), axis=-1).astype(float)


def wall_m0(x: ArrayLike) -> np.ndarray:
    """
    The wall M0(x) = (th x, 0, 1/ch x)
    @param x (ArrayLike): A position or an array of positions
    @return (np.ndarray): Shape (3,) for scalar x, (N, 3) for an array
    """
    return _stack(th(x), 0.0, sech(x))


def frame_m1(x: ArrayLike) -> np.ndarray:
    """
    The second frame vector M1(x) = (1/ch x, 0, -th x)
    @param x (ArrayLike): A position or an array of positions
    @return (np.ndarray): Shape (3,) for scalar x, (N, 3) for an array
    """
    return _stack(sech(x), 0.0, -th(x))


def wall_m0_dx(x: ArrayLike) -> np.ndarray:
    """
    M0' = (1/ch x) M1
    """
    return sech(x)[..., None] * frame_m1(x)


def frame_m1_dx(x: ArrayLike) -> np.ndarray:
    """
    M1' = -(1/ch x) M0
    """
    return -sech(x)[..., None] * wall_m0(x)


def wall_m0_dxx(x: ArrayLike) -> np.ndarray:
    """
    M0'' = -(th x / ch x) M1 - (1/ch^2 x) M0
    """
    s, t = sech(x)[..., None], th(x)[..., None]
    return -s * t * frame_m1(x) - s * s * wall_m0(x)


def frame_m1_dxx(x: ArrayLike) -> np.ndarray:
    """
    M1'' = (th x / ch x) M0 - (1/ch^2 x) M1
    """
    s, t = sech(x)[..., None], th(x)[..., None]
    return s * t * wall_m0(x) - s * s * frame_m1(x)


@dataclass(frozen=True)
class MobileFrame:
    """
    The orthonormal frame (M0(x_i), M1(x_i), M2) sampled on a grid, with the exact first and
    second derivatives of M0 and M1.
    """

    grid: Grid
    m0: np.ndarray = field(repr=False)
    m1: np.ndarray = field(repr=False)
    m0_dx: np.ndarray = field(repr=False)
    m1_dx: np.ndarray = field(repr=False)
    m0_dxx: np.ndarray = field(repr=False)
    m1_dxx: np.ndarray = field(repr=False)
    m2: np.ndarray = field(default_factory=lambda: E2.copy(), repr=False)

    @property
    def sech(self) -> np.ndarray:
        """
        1/ch x at the nodes
        """
        return self.m0[:, 2]

    @property
    def th(self) -> np.ndarray:
        """
        th x at the nodes
        """
        return self.m0[:, 0]


def mobile_frame(grid: Grid) -> MobileFrame:
    """
    Samples the mobile frame and its closed-form derivatives on a grid
    @param grid (Grid): The grid
    @return (MobileFrame): The sampled frame
    """
    nodes = grid.nodes
    return MobileFrame(
        grid=grid,
        m0=wall_m0(nodes),
        m1=frame_m1(nodes),
        m0_dx=wall_m0_dx(nodes),
        m1_dx=frame_m1_dx(nodes),
        m0_dxx=wall_m0_dxx(nodes),
        m1_dxx=frame_m1_dxx(nodes),
    )


def wall_field(grid: Grid) -> SpinField:
    """
    M0 sampled on a grid
    """
    return SpinField(grid, wall_m0(grid.nodes))


def _phase_and_argument(p: WallParams, t: float, grid: Grid):
    phase = p.delta * t + p.theta
    argument = grid.nodes + p.delta * t - p.sigma
    return phase, argument


def wall_profile(p: WallParams, t: float, grid: Grid) -> SpinField:
    """
    Samples the travelling wall u(t, x) = R_{delta t + theta} M0(x + delta t - sigma)
    @param p (WallParams): The wall parameters
    @param t (float): The time
    @param grid (Grid): The grid
    @return (SpinField): The sampled profile
    """
    phase, argument = _phase_and_argument(p, t, grid)
    return SpinField(grid, rotate(phase, wall_m0(argument)))


def wall_velocity(p: WallParams, t: float, grid: Grid, discrete_slope: bool = False) -> np.ndarray:
    """
    Closed-form time derivative of the travelling wall, delta (e1 x u + u_x)
    @param p (WallParams): The wall parameters
    @param t (float): The time
    @param grid (Grid): The grid
    @param discrete_slope (bool): Take u_x from d1 of the samples instead of the closed form
    @return (np.ndarray): The (N, 3) samples of d/dt u
    """
    phase, argument = _phase_and_argument(p, t, grid)
    profile = rotate(phase, wall_m0(argument))
    if discrete_slope:
        slope = d1_array(profile, grid.spacing)
    else:
        slope = rotate(phase, wall_m0_dx(argument))
    return p.delta * (np.cross(E1, profile) + slope)
