"""
Contains grids, sampled fields, discrete derivatives, Sobolev pairings and the elementary
geometry (rotations about e1, sphere projection) shared by every other module.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np  # pylint: disable=import-error
from scipy.integrate import trapezoid  # pylint: disable=import-error
from scipy.interpolate import CubicSpline  # pylint: disable=import-error

from config import Constants

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


class NanowireError(Exception):
    """
    Base class of every error raised by the laboratory
    """


class GridMismatchError(NanowireError):
    """
    Fields combined in one operation do not share a grid
    """


class DegenerateVectorError(NanowireError):
    """
    A vector too close to zero was projected onto the sphere
    """


class UnitNormError(NanowireError):
    """
    A sphere-valued field has a sample off the unit sphere
    """


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class Grid:
    """
    Uniform grid of n_points nodes on [-half_width, half_width]
    """

    half_width: float
    n_points: int

    def __post_init__(self):
        if self.n_points < Constants.MIN_GRID_POINTS:
            raise ValueError(f"Grid needs at least {Constants.MIN_GRID_POINTS} nodes")
        if not self.half_width > 0:
            raise ValueError("Grid half width must be positive")

    @property
    def spacing(self) -> float:
        """
        The node spacing h = 2X/(N-1)
        """
        return 2.0 * self.half_width / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        """
        The nodes x_i = -X + i h, exactly symmetric about 0
        """
        nodes = np.linspace(-self.half_width, self.half_width, self.n_points)
        # linspace is not exactly antisymmetric in floating point; mirror the left half
        nodes = 0.5 * (nodes - nodes[::-1])
        nodes.setflags(write=False)
        return nodes

    def refined(self) -> "Grid":
        """
        The grid with half the spacing on the same interval
        """
        return Grid(self.half_width, 2 * self.n_points - 1)


@dataclass(frozen=True)
class ScalarField:
    """
    Real samples on a grid
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _readonly(self.values)
        if values.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"Scalar field has shape {values.shape}, grid has {self.grid.n_points} nodes"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarField":
        """
        Sample a vectorised function on the grid nodes
        """
        return cls(grid, func(grid.nodes))


@dataclass(frozen=True)
class SpinField:
    """
    Unit-vector samples u(x_i) on a grid, stored as an (N, 3) array
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = _readonly(self.values)
        if values.shape != (self.grid.n_points, 3):
            raise GridMismatchError(
                f"Spin field has shape {values.shape}, expected ({self.grid.n_points}, 3)"
            )
        drift = norm_drift(values)
        if drift > Constants.UNIT_NORM_TOL:
            raise UnitNormError(f"Spin field leaves the unit sphere by {drift:.3e}")
        object.__setattr__(self, "values", values)

    def component(self, index: int) -> ScalarField:
        """
        One Cartesian component as a scalar field
        """
        return ScalarField(self.grid, self.values[:, index])


@dataclass(frozen=True)
class PairField:
    """
    Pair (r1, r2) of scalar fields on a shared grid
    """

    grid: Grid
    r1: ScalarField
    r2: ScalarField

    def __post_init__(self):
        if self.r1.grid != self.grid or self.r2.grid != self.grid:
            raise GridMismatchError("Pair field components must share the pair's grid")

    @classmethod
    def from_arrays(cls, grid: Grid, first: np.ndarray, second: np.ndarray) -> "PairField":
        """
        Build a pair from two sample arrays
        """
        return cls(grid, ScalarField(grid, first), ScalarField(grid, second))

    @classmethod
    def zeros(cls, grid: Grid) -> "PairField":
        """
        The zero pair
        """
        return cls.from_arrays(grid, np.zeros(grid.n_points), np.zeros(grid.n_points))

    def stack(self) -> np.ndarray:
        """
        The samples as a (2, N) array
        """
        return np.vstack((self.r1.values, self.r2.values))

    def __add__(self, other: "PairField") -> "PairField":
        _check_same_grid(self.grid, other.grid)
        return PairField.from_arrays(
            self.grid, self.r1.values + other.r1.values, self.r2.values + other.r2.values
        )

    def __sub__(self, other: "PairField") -> "PairField":
        _check_same_grid(self.grid, other.grid)
        return PairField.from_arrays(
            self.grid, self.r1.values - other.r1.values, self.r2.values - other.r2.values
        )

    def scaled(self, factor: float) -> "PairField":
        """
        The pair multiplied by a constant
        """
        return PairField.from_arrays(self.grid, factor * self.r1.values, factor * self.r2.values)

    def sup_norm(self) -> float:
        """
        Maximum of |r1|, |r2| over the nodes
        """
        return float(np.max(np.abs(self.stack())))


@dataclass(frozen=True)
class WallParams:
    """
    Parameters (delta, theta, sigma) of a travelling wall profile
    """

    delta: float
    theta: float
    sigma: float

    def __post_init__(self):
        if not all(math.isfinite(value) for value in (self.delta, self.theta, self.sigma)):
            raise ValueError(f"Wall parameters must be finite: {self}")

    @property
    def symmetry(self) -> Tuple[float, float]:
        """
        The symmetry part (theta, sigma)
        """
        return self.theta, self.sigma


@dataclass(frozen=True)
class ControlSchedule:
    """
    Piecewise-constant, right-continuous control t -> delta(t).
    levels[i] applies on [breakpoints[i-1], breakpoints[i]); final_level from the last
    breakpoint on.
    """

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]
    final_level: float

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "levels", tuple(float(level) for level in self.levels))
        if len(self.breakpoints) != len(self.levels):
            raise ValueError("A control schedule needs one level per breakpoint")
        if any(b1 >= b2 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("Control breakpoints must be strictly increasing")

    @classmethod
    def constant(cls, level: float) -> "ControlSchedule":
        """
        The schedule with a single level for all times
        """
        return cls((), (), level)

    def __call__(self, time: float) -> float:
        index = int(np.searchsorted(self.breakpoints, time, side="right"))
        if index == len(self.breakpoints):
            return self.final_level
        return self.levels[index]

    def accumulated(self, time: float) -> float:
        """
        The integral of delta over [0, time]
        """
        total = 0.0
        start = 0.0
        for breakpoint_time, level in zip(self.breakpoints, self.levels):
            if time <= breakpoint_time:
                return total + level * (time - start)
            total += level * (breakpoint_time - start)
            start = breakpoint_time
        return total + self.final_level * (time - start)


def _check_same_grid(first: Grid, second: Grid) -> None:
    if first != second:
        raise GridMismatchError(f"Grid mismatch: {first} vs {second}")


def d1_array(values: np.ndarray, spacing: float) -> np.ndarray:
    """
    Central second-order first derivative along axis 0 with one-sided second-order
    closures at both ends
    @param values (np.ndarray): Samples of shape (N,) or (N, k)
    @param spacing (float): The grid spacing
    @return (np.ndarray): The derivative samples, same shape
    """
    derivative = np.empty_like(values, dtype=float)
    derivative[1:-1] = (values[2:] - values[:-2]) / (2.0 * spacing)
    derivative[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * spacing)
    derivative[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * spacing)
    return derivative


def d2_array(values: np.ndarray, spacing: float) -> np.ndarray:
    """
    Three-point second derivative along axis 0 with one-sided second-order closures
    @param values (np.ndarray): Samples of shape (N,) or (N, k)
    @param spacing (float): The grid spacing
    @return (np.ndarray): The second derivative samples, same shape
    """
    h_squared = spacing * spacing
    derivative = np.empty_like(values, dtype=float)
    derivative[1:-1] = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h_squared
    derivative[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h_squared
    derivative[-1] = (
        2.0 * values[-1] - 5.0 * values[-2] + 4.0 * values[-3] - values[-4]
    ) / h_squared
    return derivative


def d1(f: ScalarField) -> ScalarField:
    """
    Discrete first derivative of a scalar field
    """
    return ScalarField(f.grid, d1_array(f.values, f.grid.spacing))


def d2(f: ScalarField) -> ScalarField:
    """
    Discrete second derivative of a scalar field
    """
    return ScalarField(f.grid, d2_array(f.values, f.grid.spacing))


def inner_l2(f: ScalarField, g: ScalarField) -> float:
    """
    Trapezoid quadrature of f*g over [-X, X]
    """
    _check_same_grid(f.grid, g.grid)
    return float(trapezoid(f.values * g.values, dx=f.grid.spacing))


def inner_pair(first: PairField, second: PairField) -> float:
    """
    Componentwise-summed L2 pairing of two pair fields
    """
    return inner_l2(first.r1, second.r1) + inner_l2(first.r2, second.r2)


def _h2_squared(values: np.ndarray, grid: Grid) -> float:
    """
    Sum over the columns of ||f||^2 + ||f'||^2 + ||f''||^2
    """
    first = d1_array(values, grid.spacing)
    second = d2_array(values, grid.spacing)
    integrand = values**2 + first**2 + second**2
    if integrand.ndim > 1:
        integrand = integrand.sum(axis=1)
    return float(trapezoid(integrand, dx=grid.spacing))


def h2_dist(u: SpinField, w: SpinField) -> float:
    """
    Discrete H2 norm of u - w, summed over the three components
    """
    _check_same_grid(u.grid, w.grid)
    return math.sqrt(_h2_squared(u.values - w.values, u.grid))


def h2_norm_pair(r: PairField) -> float:
    """
    Discrete H2 norm of a pair field
    """
    return math.sqrt(_h2_squared(r.stack().T, r.grid))


def rotation_matrix(theta: float) -> np.ndarray:
    """
    The rotation R_theta of angle theta about e1
    """
    cos, sin = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, cos, -sin], [0.0, sin, cos]])


def rotate(theta: float, v: np.ndarray) -> np.ndarray:
    """
    Apply R_theta to a vector of shape (3,) or to every row of an (N, 3) array
    """
    return np.asarray(v, dtype=float) @ rotation_matrix(theta).T


def sphere_project(v: np.ndarray) -> np.ndarray:
    """
    Normalise a vector (3,) or every row of an (N, 3) array onto the unit sphere
    """
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norms <= Constants.DEGENERATE_NORM):
        raise DegenerateVectorError("Cannot project a vector of (near) zero length onto S2")
    return v / norms


def norm_drift(values: np.ndarray) -> float:
    """
    Largest deviation of a nodal norm from 1
    """
    return float(np.max(np.abs(np.linalg.norm(values, axis=-1) - 1.0)))


def symmetry_action(u: SpinField, theta: float, sigma: float) -> SpinField:
    """
    The symmetry M_Lambda u = R_theta u(. - sigma). Off-grid samples come from a cubic spline
    per component; points shifted outside the grid take the end values.
    """
    nodes = u.grid.nodes
    if sigma == 0.0:
        shifted = np.array(u.values)
    else:
        spline = CubicSpline(nodes, u.values, axis=0)
        shifted = spline(np.clip(nodes - sigma, nodes[0], nodes[-1]))
    return SpinField(u.grid, sphere_project(rotate(theta, shifted)))


def energy(u: SpinField) -> float:
    """
    E(u) = 1/2 int |u_x|^2 + u2^2 + u3^2. The exchange part uses the forward differences
    whose composition is the three-point Laplacian of d2, so that the semi-discrete flow
    dissipates it exactly; the anisotropy part uses the trapezoid rule.
    """
    spacing = u.grid.spacing
    forward = np.diff(u.values, axis=0) / spacing
    exchange = spacing * float(np.sum(forward**2))
    anisotropy = float(trapezoid(u.values[:, 1] ** 2 + u.values[:, 2] ** 2, dx=spacing))
    return 0.5 * (exchange + anisotropy)
