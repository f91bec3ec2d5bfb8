"""
Splitting of mobile frame coordinates into a symmetry part Lambda = (theta, sigma) and a
remainder W orthogonal to the kernel of A, with the Lyapunov functional V(W), spectral
diagnostics of L and exponential decay fits.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np  # pylint: disable=import-error
from scipy.linalg import eigh_tridiagonal  # pylint: disable=import-error
from scipy.stats import linregress  # pylint: disable=import-error

from analytic_walls import MobileFrame, mobile_frame, sech, wall_m0
from config import Constants, Severity
from field_core import (
    Grid,
    NanowireError,
    PairField,
    ScalarField,
    SpinField,
    h2_norm_pair,
    inner_l2,
    inner_pair,
    rotate,
    symmetry_action,
)
from frame_reduction import OutOfChartError, frame_coords, frame_reconstruct, op_L, potential
from log_utils import print_and_log

Lambda = Tuple[float, float]


class ChartFailureError(NanowireError):
    """
    Newton's method did not find the symmetry coordinates; the input is outside the
    neighbourhood where the splitting is a diffeomorphism
    """


class DecayFitError(NanowireError):
    """
    The series cannot be fitted by an exponential
    """


@dataclass(frozen=True)
class Decomposition:
    """
    r = R_Lambda + W with W orthogonal to a1 and a2
    """

    theta: float
    sigma: float
    W: PairField = field(repr=False)  # pylint: disable=invalid-name
    newton_iters: int
    residual: float

    @property
    def Lambda(self) -> Lambda:  # pylint: disable=invalid-name
        """
        The symmetry coordinates (theta, sigma)
        """
        return self.theta, self.sigma


@dataclass(frozen=True)
class SpectralReport:
    """
    Leading eigenvalues of the discrete L, in descending order
    """

    grid: Grid
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    overlaps: np.ndarray

    @property
    def kernel_eigenvalue(self) -> float:
        """
        The eigenvalue closest to 0, approximating the bound state
        """
        return float(self.eigenvalues[0])

    @property
    def kernel_overlap(self) -> float:
        """
        |<phi_1, sech/|sech|>|
        """
        return float(self.overlaps[0])

    @property
    def kernel_mode(self) -> ScalarField:
        """
        The leading eigenvector on the full grid, zero at both ends and positive at the centre
        """
        mode = np.zeros(self.grid.n_points)
        mode[1:-1] = self.eigenvectors[:, 0]
        if mode[self.grid.n_points // 2] < 0:
            mode = -mode
        return ScalarField(self.grid, mode)

    @property
    def second_eigenvalue(self) -> float:
        """
        The largest eigenvalue of L on the complement of the kernel
        """
        return float(self.eigenvalues[1])

    @property
    def a_eigenvalues(self) -> np.ndarray:
        """
        Eigenvalues (1 +- i) lambda of A = JL on the computed eigenvectors, excluding the kernel
        """
        return np.concatenate(
            [(1.0 + 1.0j) * self.eigenvalues[1:], (1.0 - 1.0j) * self.eigenvalues[1:]]
        )

    @property
    def a_spectral_abscissa(self) -> float:
        """
        Largest real part of the spectrum of A restricted to the kernel complement
        """
        return float(np.max(self.a_eigenvalues.real))


def kernel_basis(grid: Grid) -> Tuple[PairField, PairField]:
    """
    a1 = (0, 1/ch x) and a2 = (1/ch x, 0), not normalised
    """
    kernel = sech(grid.nodes)
    zeros = np.zeros(grid.n_points)
    return PairField.from_arrays(grid, zeros, kernel), PairField.from_arrays(grid, kernel, zeros)


def r_of_lambda(
    symmetry: Lambda, grid: Grid, frame: Optional[MobileFrame] = None
) -> PairField:
    """
    Coordinates in the mobile frame of M_Lambda(x) = R_theta M0(x - sigma)
    @param symmetry (Lambda): (theta, sigma)
    @param grid (Grid): The grid
    @param frame (Optional[MobileFrame]): The sampled frame, built when not supplied
    @return (PairField): R_Lambda
    """
    theta, sigma = symmetry
    frame = frame or mobile_frame(grid)
    moved = SpinField(grid, rotate(theta, wall_m0(grid.nodes - sigma)))
    return frame_coords(moved, frame)


def h_map(
    symmetry: Lambda,
    grid: Grid,
    frame: Optional[MobileFrame] = None,
    basis: Optional[Tuple[PairField, PairField]] = None,
) -> np.ndarray:
    """
    h(Lambda) = (<R_Lambda, a1>, <R_Lambda, a2>)
    """
    first, second = basis or kernel_basis(grid)
    coordinates = r_of_lambda(symmetry, grid, frame)
    return np.array([inner_pair(coordinates, first), inner_pair(coordinates, second)])


def jacobian_h(
    symmetry: Lambda,
    grid: Grid,
    step: float = Constants.NEWTON_FD_STEP,
    frame: Optional[MobileFrame] = None,
    basis: Optional[Tuple[PairField, PairField]] = None,
) -> np.ndarray:
    """
    Central difference Jacobian of h, columns ordered (theta, sigma)
    @param symmetry (Lambda): The point of evaluation
    @param grid (Grid): The grid
    @param step (float): The difference step
    @return (np.ndarray): The 2x2 Jacobian
    """
    frame = frame or mobile_frame(grid)
    basis = basis or kernel_basis(grid)
    jacobian = np.empty((2, 2))
    for column in range(2):
        offset = np.zeros(2)
        offset[column] = step
        forward = h_map(tuple(np.add(symmetry, offset)), grid, frame, basis)
        backward = h_map(tuple(np.subtract(symmetry, offset)), grid, frame, basis)
        jacobian[:, column] = (forward - backward) / (2.0 * step)
    return jacobian


def extract_coordinates(
    r: PairField,
    chart_radius: float = Constants.CHART_RADIUS,
    frame: Optional[MobileFrame] = None,
) -> Decomposition:
    """
    Solves h(Lambda) = (<r, a1>, <r, a2>) by Newton's method from Lambda = 0 and returns
    W = r - R_Lambda
    @param r (PairField): Coordinates with sup norm at most chart_radius
    @param chart_radius (float): Largest accepted sup norm of r
    @param frame (Optional[MobileFrame]): The sampled frame, built when not supplied
    @return (Decomposition): Lambda, W and the Newton statistics
    """
    grid = r.grid
    if r.sup_norm() > chart_radius:
        raise ChartFailureError(
            f"|r|_inf = {r.sup_norm():.3f} is outside the chart radius {chart_radius}"
        )
    frame = frame or mobile_frame(grid)
    basis = kernel_basis(grid)
    target = np.array([inner_pair(r, basis[0]), inner_pair(r, basis[1])])

    symmetry = np.zeros(2)
    residual = math.inf
    for iteration in range(Constants.NEWTON_MAX_ITERS + 1):
        try:
            mismatch = h_map(tuple(symmetry), grid, frame, basis) - target
        except OutOfChartError as chart_error:
            raise ChartFailureError(
                f"Newton iterate {tuple(symmetry)} left the chart"
            ) from chart_error
        residual = float(np.max(np.abs(mismatch)))
        if residual <= Constants.NEWTON_TOL:
            coordinates = r_of_lambda(tuple(symmetry), grid, frame)
            return Decomposition(
                theta=float(symmetry[0]),
                sigma=float(symmetry[1]),
                W=r - coordinates,
                newton_iters=iteration,
                residual=residual,
            )
        if iteration == Constants.NEWTON_MAX_ITERS:
            break
        jacobian = jacobian_h(tuple(symmetry), grid, frame=frame, basis=basis)
        symmetry = symmetry - np.linalg.solve(jacobian, mismatch)

    raise ChartFailureError(
        f"Newton did not converge in {Constants.NEWTON_MAX_ITERS} iterations "
        f"(residual {residual:.3e})"
    )


def decompose_field(v: SpinField, frame: Optional[MobileFrame] = None) -> Decomposition:
    """
    Mobile frame coordinates of v followed by extract_coordinates
    """
    frame = frame or mobile_frame(v.grid)
    return extract_coordinates(frame_coords(v, frame), frame=frame)


def lyapunov_v(W: PairField) -> float:  # pylint: disable=invalid-name
    """
    V(W) = 1/2 |L W1|^2 + 1/2 |L W2|^2, warning when W is not orthogonal to the kernel
    @param W (PairField): A remainder orthogonal to a1, a2
    @return (float): The Lyapunov functional
    """
    first, second = kernel_basis(W.grid)
    leak = max(abs(inner_pair(W, first)), abs(inner_pair(W, second)))
    if leak > Constants.ORTHOGONALITY_WARNING:
        print_and_log(
            f"Lyapunov functional evaluated off the kernel complement (leak {leak:.3e})",
            Severity.MINOR,
        )
    image_first, image_second = op_L(W.r1), op_L(W.r2)
    return 0.5 * (
        inner_l2(image_first, image_first) + inner_l2(image_second, image_second)
    )


def spectral_report(grid: Grid, k: int = 6) -> SpectralReport:
    """
    Top-k eigenpairs of the discrete L on the interior nodes with homogeneous Dirichlet
    closure; the matrix is symmetric tridiagonal
    @param grid (Grid): The grid, at most MAX_DENSE_POINTS nodes
    @param k (int): Number of eigenvalues
    @return (SpectralReport): The eigenvalues in descending order with their overlaps with sech
    """
    if grid.n_points > Constants.MAX_DENSE_POINTS:
        raise ValueError(
            f"Spectral report is limited to {Constants.MAX_DENSE_POINTS} nodes, "
            f"got {grid.n_points}"
        )
    interior = grid.n_points - 2
    if not 2 <= k <= interior:
        raise ValueError(f"k must lie in [2, {interior}]")
    h_squared = grid.spacing**2
    diagonal = -2.0 / h_squared + potential(grid)[1:-1]
    off_diagonal = np.full(interior - 1, 1.0 / h_squared)
    eigenvalues, eigenvectors = eigh_tridiagonal(
        diagonal, off_diagonal, select="i", select_range=(interior - k, interior - 1)
    )
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]

    kernel = sech(grid.nodes[1:-1])
    kernel /= np.linalg.norm(kernel)
    overlaps = np.abs(kernel @ eigenvectors)
    return SpectralReport(grid, eigenvalues, eigenvectors, overlaps)


def linearized_rate(report: SpectralReport) -> float:
    """
    The decay rate of W predicted by the linearisation, minus the spectral abscissa of A
    on the kernel complement
    """
    return -report.a_spectral_abscissa


def decay_fit(
    times: Sequence[float],
    values: Sequence[float],
    skip: float = 0.0,
    stop: float = math.inf,
) -> Tuple[float, float]:
    """
    Least-squares fit of log(value) against t over skip <= t <= stop
    @param times (Sequence[float]): The sample times
    @param values (Sequence[float]): The positive sample values
    @param skip (float): Samples before this time are transient and ignored
    @param stop (float): Samples after this time are ignored
    @return (Tuple[float, float]): The decay rate (minus the slope) and r squared
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    window = (times >= skip) & (times <= stop)
    times, values = times[window], values[window]
    if len(times) < Constants.MIN_DECAY_SAMPLES:
        raise DecayFitError(
            f"{len(times)} samples in [{skip}, {stop}], "
            f"at least {Constants.MIN_DECAY_SAMPLES} needed"
        )
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise DecayFitError("Decay fit needs positive values; shorten the window")
    logs = np.log(values)
    if np.ptp(logs) == 0.0:
        return 0.0, 1.0
    fit = linregress(times, logs)
    return float(-fit.slope), float(fit.rvalue**2)


def project_out_kernel(r: PairField) -> PairField:
    """
    Orthogonal projection onto the complement of span{a1, a2}
    """
    projected = r
    for mode in kernel_basis(r.grid):
        projected = projected - mode.scaled(inner_pair(projected, mode) / inner_pair(mode, mode))
    return projected


def perturbation_in_e(
    grid: Grid, amplitude: float, seed: int = 42, n_modes: int = 4
) -> PairField:
    """
    Fixed-seed combination of Gaussian bumps in both components, projected onto the kernel
    complement and scaled to the requested H2 norm
    @param grid (Grid): The grid
    @param amplitude (float): The H2 norm of the result
    @param seed (int): The random seed
    @param n_modes (int): Bumps per component
    @return (PairField): The perturbation W
    """
    rng = np.random.default_rng(seed)
    nodes = grid.nodes
    components = []
    for _ in range(2):
        centres = rng.uniform(-4.0, 4.0, n_modes)
        widths = rng.uniform(1.0, 3.0, n_modes)
        weights = rng.normal(size=n_modes)
        bumps = np.exp(-(((nodes[:, None] - centres) / widths) ** 2))
        components.append(bumps @ weights)
    perturbation = project_out_kernel(PairField.from_arrays(grid, *components))
    if amplitude == 0.0:
        return PairField.zeros(grid)
    return perturbation.scaled(amplitude / h2_norm_pair(perturbation))


def perturbed_wall(  # pylint: disable=invalid-name
    W: PairField, theta: float = 0.0, sigma: float = 0.0
) -> SpinField:
    """
    The wall with mobile frame coordinates W, moved by R_theta and a translation by sigma
    """
    frame = mobile_frame(W.grid)
    return symmetry_action(frame_reconstruct(W, frame), theta, sigma)
