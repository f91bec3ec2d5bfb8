"""
Mobile frame coordinates r = (r1, r2) of a field close to the wall, the linear operators
l, L and A = JL, and the reduced right-hand side A r + R_delta(x, r, r_x, r_xx).
"""

from dataclasses import dataclass, fields
from typing import Tuple

import numpy as np  # pylint: disable=import-error

from analytic_walls import MobileFrame, mobile_frame, sech, th
from config import Constants
from field_core import (
    NanowireError,
    PairField,
    ScalarField,
    SpinField,
    d1,
    d1_array,
    d2,
    d2_array,
)
from llg_dynamics import rhs_moving_pointwise

J_MATRIX = np.array([[1.0, 1.0], [-1.0, 1.0]])


class OutOfChartError(NanowireError):
    """
    The field is not on the hemisphere around M0 where the mobile frame chart is valid
    """


class ChartDegeneracyError(NanowireError):
    """
    |r| is too close to 1 for sqrt(1 - |r|^2) to be used
    """


class OutOfRegimeError(NanowireError):
    """
    Input outside |r|^2 <= 1/2, |delta| <= 1
    """


def frame_coords(v: SpinField, frame: MobileFrame) -> PairField:
    """
    r1 = <v, M1>, r2 = <v, M2> at every node
    @param v (SpinField): A field with <v, M0> > 0 everywhere
    @param frame (MobileFrame): The mobile frame on the same grid
    @return (PairField): The coordinates of v
    """
    values = v.values
    along_m0 = np.einsum("ij,ij->i", values, frame.m0)
    if np.any(along_m0 <= 0.0):
        worst = int(np.argmin(along_m0))
        raise OutOfChartError(
            f"<v, M0> = {along_m0[worst]:.3e} at x = {v.grid.nodes[worst]:.4f}; "
            "field is not in the mobile frame chart"
        )
    return PairField.from_arrays(
        v.grid, np.einsum("ij,ij->i", values, frame.m1), values @ frame.m2
    )


def frame_reconstruct(r: PairField, frame: MobileFrame) -> SpinField:
    """
    v = sqrt(1 - |r|^2) M0 + r1 M1 + r2 M2
    """
    lifted, _, _ = frame_lift(r, PairField.zeros(r.grid), PairField.zeros(r.grid), frame)
    return SpinField(r.grid, lifted)


def _root(r1: np.ndarray, r2: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    s = sqrt(1 - |r|^2) and s - 1, the latter without cancellation
    """
    squared = r1 * r1 + r2 * r2
    root = np.sqrt(1.0 - squared)
    return root, -squared / (1.0 + root)


def frame_lift(
    r: PairField, r_x: PairField, r_xx: PairField, frame: MobileFrame
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Lifts coordinates and their derivatives back to v, v_x and v_xx with the exact product
    rule and the closed-form derivatives of the frame
    @param r (PairField): The coordinates
    @param r_x (PairField): Their first derivative
    @param r_xx (PairField): Their second derivative
    @param frame (MobileFrame): The frame on the same grid
    @return (Tuple[np.ndarray, np.ndarray, np.ndarray]): (N, 3) samples of v, v_x, v_xx
    """
    r1, r2 = r.r1.values, r.r2.values
    p1, p2 = r_x.r1.values, r_x.r2.values
    q1, q2 = r_xx.r1.values, r_xx.r2.values
    gap = 1.0 - (r1 * r1 + r2 * r2)
    if np.any(gap < Constants.CHART_DEGENERACY):
        raise ChartDegeneracyError("|r|^2 reaches 1 - 1e-10, the frame chart degenerates")

    root = np.sqrt(gap)
    r_dot_p = r1 * p1 + r2 * p2
    root_x = -r_dot_p / root
    root_xx = -(gap * (r1 * q1 + r2 * q2 + p1 * p1 + p2 * p2) + r_dot_p**2) / root**3

    def col(values):
        return values[:, None]

    m2 = frame.m2[None, :]
    v = col(root) * frame.m0 + col(r1) * frame.m1 + col(r2) * m2
    v_x = (
        col(root_x) * frame.m0
        + col(root) * frame.m0_dx
        + col(p1) * frame.m1
        + col(r1) * frame.m1_dx
        + col(p2) * m2
    )
    v_xx = (
        col(root_xx) * frame.m0
        + 2.0 * col(root_x) * frame.m0_dx
        + col(root) * frame.m0_dxx
        + col(q1) * frame.m1
        + 2.0 * col(p1) * frame.m1_dx
        + col(r1) * frame.m1_dxx
        + col(q2) * m2
    )
    return v, v_x, v_xx


def op_ell(f: ScalarField) -> ScalarField:
    """
    l f = f' + th x f
    """
    frame_th = th(f.grid.nodes)
    return ScalarField(f.grid, d1(f).values + frame_th * f.values)


def op_ell_adjoint(f: ScalarField) -> ScalarField:
    """
    l* f = -f' + th x f
    """
    frame_th = th(f.grid.nodes)
    return ScalarField(f.grid, -d1(f).values + frame_th * f.values)


def potential(grid) -> np.ndarray:
    """
    The potential 1 - 2 th^2 x of L at the nodes
    """
    return 1.0 - 2.0 * th(grid.nodes) ** 2


def op_L(f: ScalarField) -> ScalarField:  # pylint: disable=invalid-name
    """
    L f = f'' + (1 - 2 th^2 x) f
    """
    return ScalarField(f.grid, d2(f).values + potential(f.grid) * f.values)


def op_A(r: PairField) -> PairField:  # pylint: disable=invalid-name
    """
    A r = J (L r1, L r2) = (L r1 + L r2, -L r1 + L r2)
    """
    first, second = op_L(r.r1).values, op_L(r.r2).values
    return PairField.from_arrays(r.grid, first + second, -first + second)


def op_J_eigenvalues() -> np.ndarray:  # pylint: disable=invalid-name
    """
    The eigenvalues of J, sorted by imaginary part
    """
    eigenvalues = np.linalg.eigvals(J_MATRIX)
    return eigenvalues[np.argsort(eigenvalues.imag)]


@dataclass(frozen=True)
class ReducedRHSParts:
    """
    The six terms of A r - delta diag(l, l) r + G(r) r_xx + H1(x, r) r_x + H2(r)(r_x, r_x)
    + P_delta(x, r)
    """

    linear_part: PairField
    ell_term: PairField
    g_term: PairField
    h1_term: PairField
    h2_term: PairField
    p_term: PairField

    def total(self) -> PairField:
        """
        Sum of all parts
        """
        parts = [getattr(self, part.name) for part in fields(self)]
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        return total


def _check_regime(r1: np.ndarray, r2: np.ndarray, delta: float) -> None:
    squared = r1 * r1 + r2 * r2
    if np.max(squared) > Constants.REGIME_R_SQUARED:
        raise OutOfRegimeError(
            f"max |r|^2 = {np.max(squared):.4f} exceeds {Constants.REGIME_R_SQUARED}"
        )
    if abs(delta) > Constants.REGIME_DELTA:
        raise OutOfRegimeError(f"|delta| = {abs(delta)} exceeds {Constants.REGIME_DELTA}")


def reduced_rhs(r: PairField, delta: float) -> Tuple[PairField, ReducedRHSParts]:
    """
    Right-hand side of the reduced system r_t = A r + R_delta(x, r, r_x, r_xx), with r_x and
    r_xx taken from d1 and d2 of r
    @param r (PairField): The coordinates, |r|^2 <= 1/2 at every node
    @param delta (float): The applied field, |delta| <= 1
    @return (Tuple[PairField, ReducedRHSParts]): The total and its parts
    """
    r1, r2 = r.r1.values, r.r2.values
    _check_regime(r1, r2, delta)
    grid = r.grid
    spacing = grid.spacing
    p1, p2 = d1_array(r1, spacing), d1_array(r2, spacing)
    q1, q2 = d2_array(r1, spacing), d2_array(r2, spacing)
    frame_th = th(grid.nodes)
    frame_sech = sech(grid.nodes)
    sech_squared = frame_sech**2
    sh_over_ch2 = frame_th * frame_sech
    root, root_m1 = _root(r1, r2)
    squared = r1 * r1 + r2 * r2

    linear_part = op_A(r)
    ell_term = PairField(grid, op_ell(r.r1), op_ell(r.r2)).scaled(-delta)

    g_term = PairField.from_arrays(
        grid,
        (r1 * r2 / root) * q1 + (r2 * r2 / root + root_m1) * q2,
        -(r1 * r1 / root + root_m1) * q1 - (r1 * r2 / root) * q2,
    )

    h1_factor = 2.0 * frame_sech / root
    h1_term = PairField.from_arrays(
        grid,
        h1_factor * ((r2 * root - r1 * r2 * r2) * p1 + (-r2 + r2 * r1 * r1) * p2),
        h1_factor * ((r2 - r2**3) * p1 + (root * r2 + r1 * r2 * r2) * p2),
    )

    form = (root * root * (p1 * p1 + p2 * p2) + (r1 * p1 + r2 * p2) ** 2) / root**3
    h2_term = PairField.from_arrays(
        grid, form * (root * r1 + r2), form * (root * r2 - r1)
    )

    p_first = (
        2.0 * r2 * root_m1 * sech_squared
        - 2.0 * r1 * r2 * sh_over_ch2
        - 2.0 * r1 * squared * sech_squared
        - 2.0 * r1 * r1 * root * sh_over_ch2
        + r1**3
        - r2 * root_m1
        + r1 * r2 * r2
        - delta * (frame_sech * (root_m1 + r1 * r1) + root_m1 * r1 * frame_th)
    )
    p_second = (
        -2.0 * r1 * root_m1 * sech_squared
        + 2.0 * r1 * r1 * sh_over_ch2
        - 2.0 * r2 * squared * sech_squared
        - 2.0 * r1 * r2 * root * sh_over_ch2
        + r2 * squared
        + root_m1 * r1
        - delta * (frame_sech * r1 * r2 + root_m1 * r2 * frame_th)
    )
    p_term = PairField.from_arrays(grid, p_first, p_second)

    parts = ReducedRHSParts(linear_part, ell_term, g_term, h1_term, h2_term, p_term)
    return parts.total(), parts


def lift_project_rhs(r: PairField, delta: float) -> PairField:
    """
    Independent evaluation of the reduced right-hand side: lift r with d1 r, d2 r to v, evaluate
    the moving frame equation on the lift and project v_t onto M1 and M2
    @param r (PairField): The coordinates
    @param delta (float): The applied field
    @return (PairField): (<v_t, M1>, <v_t, M2>)
    """
    frame = mobile_frame(r.grid)
    r_x = PairField(r.grid, d1(r.r1), d1(r.r2))
    r_xx = PairField(r.grid, d2(r.r1), d2(r.r2))
    v, v_x, v_xx = frame_lift(r, r_x, r_xx, frame)
    h_v = np.array(v_xx)
    h_v[:, 1:] -= v[:, 1:]
    v_t = rhs_moving_pointwise(v, v_x, h_v, delta)
    return PairField.from_arrays(
        r.grid, np.einsum("ij,ij->i", v_t, frame.m1), v_t @ frame.m2
    )
