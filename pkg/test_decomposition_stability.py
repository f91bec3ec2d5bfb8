"""
Contains Unit Tests for the splitting r = R_Lambda + W, the Lyapunov functional, the spectrum
of L and the decay fits
"""

import math
import unittest

import numpy as np  # pylint: disable=import-error
from mock import patch  # pylint: disable=import-error

from analytic_walls import mobile_frame, sech, th, wall_m0
from config import Severity
from control_experiments import NominalFrameTracker
from decomposition_stability import (
    ChartFailureError,
    DecayFitError,
    decay_fit,
    decompose_field,
    extract_coordinates,
    h_map,
    jacobian_h,
    kernel_basis,
    linearized_rate,
    lyapunov_v,
    perturbation_in_e,
    perturbed_wall,
    project_out_kernel,
    r_of_lambda,
    spectral_report,
)
from field_core import ControlSchedule, Grid, PairField, SpinField, h2_norm_pair, inner_pair, rotate
from frame_reduction import frame_reconstruct, op_A
from llg_dynamics import SimConfig, simulate
from test_utils import test_data

# pylint: disable=line-too-long, invalid-name


class KernelTests(unittest.TestCase):
    """
    Unit tests for the kernel basis and the symmetry coordinates
    """

    def setUp(self):
        """
        Set up the test case
        """
        self.grid = test_data.default_grid
        self.frame = mobile_frame(self.grid)

    def test_GIVEN_grid_WHEN_kernel_basis_THEN_orthogonal_with_norm_two(self):
        """
        Test <a1, a2> = 0 and |a_i|^2 = 2
        """
        first, second = kernel_basis(self.grid)
        self.assertEqual(inner_pair(first, second), 0.0)
        self.assertAlmostEqual(inner_pair(first, first), 2.0, delta=1e-6)
        self.assertAlmostEqual(inner_pair(second, second), 2.0, delta=1e-6)

    def test_GIVEN_kernel_basis_WHEN_A_THEN_zero_up_to_truncation(self):
        """
        Test A a_i = 0 on the default grid
        """
        for mode in kernel_basis(self.grid):
            self.assertLess(op_A(mode).sup_norm(), 8e-4)

    def test_GIVEN_zero_symmetry_WHEN_r_of_lambda_THEN_zero(self):
        """
        Test R_(0, 0) = 0
        """
        self.assertLess(r_of_lambda((0.0, 0.0), self.grid, self.frame).sup_norm(), 1e-15)

    def test_GIVEN_rotation_only_WHEN_r_of_lambda_THEN_closed_form(self):
        """
        Test R_(theta, 0) = ((1 - cos theta) sech th, -sin theta sech)
        """
        nodes = self.grid.nodes
        r = r_of_lambda((0.2, 0.0), self.grid, self.frame)
        self.assertLess(np.max(np.abs(r.r1.values - (1.0 - math.cos(0.2)) * sech(nodes) * th(nodes))), 1e-12)
        self.assertLess(np.max(np.abs(r.r2.values + math.sin(0.2) * sech(nodes))), 1e-12)

    def test_GIVEN_symmetry_WHEN_r_of_lambda_reconstructed_THEN_moved_wall(self):
        """
        Test that R_Lambda lifts back to R_theta M0(x - sigma)
        """
        r = r_of_lambda((0.3, -0.7), self.grid, self.frame)
        expected = rotate(0.3, wall_m0(self.grid.nodes + 0.7))
        self.assertLess(np.max(np.abs(frame_reconstruct(r, self.frame).values - expected)), 1e-12)

    def test_GIVEN_origin_WHEN_jacobian_of_h_THEN_minus_two_identity(self):
        """
        Test dh(0) = -2 Id: d/dtheta R = -(0, sech), d/dsigma R = -(sech, 0)
        """
        self.assertTrue(np.allclose(jacobian_h((0.0, 0.0), self.grid, frame=self.frame), -2.0 * np.eye(2), atol=1e-6))

    def test_GIVEN_origin_WHEN_h_map_THEN_zero(self):
        """
        Test h(0) = 0
        """
        self.assertTrue(np.allclose(h_map((0.0, 0.0), self.grid, self.frame), 0.0, atol=1e-15))


class ExtractCoordinatesTests(unittest.TestCase):
    """
    Unit tests for Newton's method on h(Lambda) = (<r, a1>, <r, a2>)
    """

    def setUp(self):
        """
        Set up the test case
        """
        self.grid = test_data.coarse_grid
        self.frame = mobile_frame(self.grid)

    def test_GIVEN_zero_coordinates_WHEN_extracted_THEN_zero_and_no_iterations(self):
        """
        Test that r = 0 gives Lambda = 0, W = 0 without a Newton step
        """
        decomposition = extract_coordinates(PairField.zeros(self.grid), frame=self.frame)
        self.assertEqual(decomposition.Lambda, (0.0, 0.0))
        self.assertLess(decomposition.W.sup_norm(), 1e-15)
        self.assertEqual(decomposition.newton_iters, 0)

    def test_GIVEN_pure_symmetry_WHEN_extracted_THEN_symmetry_recovered_and_no_remainder(self):
        """
        Test that r = R_Lambda gives back Lambda with W = 0
        """
        decomposition = extract_coordinates(r_of_lambda((0.1, 0.3), self.grid, self.frame), frame=self.frame)
        self.assertAlmostEqual(decomposition.theta, 0.1, delta=1e-10)
        self.assertAlmostEqual(decomposition.sigma, 0.3, delta=1e-10)
        self.assertLess(h2_norm_pair(decomposition.W), 1e-9)

    def test_GIVEN_grid_of_symmetries_WHEN_extracted_THEN_each_recovered(self):
        """
        Test that the splitting inverts R_Lambda on [-0.3, 0.3] x [-1, 1], where |r|_inf reaches 0.82
        """
        for theta in np.linspace(-0.3, 0.3, 5):
            for sigma in np.linspace(-1.0, 1.0, 5):
                decomposition = extract_coordinates(r_of_lambda((theta, sigma), self.grid, self.frame), chart_radius=0.9, frame=self.frame)
                self.assertAlmostEqual(decomposition.theta, theta, delta=1e-10)
                self.assertAlmostEqual(decomposition.sigma, sigma, delta=1e-10)

    def test_GIVEN_symmetry_plus_remainder_WHEN_extracted_THEN_both_recovered(self):
        """
        Test idempotence: R_Lambda + W with W orthogonal to the kernel splits back into Lambda, W
        """
        remainder = perturbation_in_e(self.grid, 1e-2, seed=7)
        r = r_of_lambda((-0.2, 0.4), self.grid, self.frame) + remainder
        decomposition = extract_coordinates(r, frame=self.frame)
        self.assertAlmostEqual(decomposition.theta, -0.2, delta=1e-9)
        self.assertAlmostEqual(decomposition.sigma, 0.4, delta=1e-9)
        self.assertLess((decomposition.W - remainder).sup_norm(), 1e-9)

    def test_GIVEN_remainder_WHEN_extracted_THEN_remainder_orthogonal_to_kernel(self):
        """
        Test <W, a_i> = 0 after the splitting
        """
        r = test_data.standard_pair(self.grid)
        decomposition = extract_coordinates(r, frame=self.frame)
        for mode in kernel_basis(self.grid):
            self.assertLess(abs(inner_pair(decomposition.W, mode)), 1e-11)

    def test_GIVEN_coordinates_beyond_chart_radius_WHEN_extracted_THEN_chart_failure_error(self):
        """
        Test that |r|_inf > 0.5 is refused
        """
        nodes = self.grid.nodes
        r = PairField.from_arrays(self.grid, 0.6 * sech(nodes), np.zeros(self.grid.n_points))
        with self.assertRaises(ChartFailureError):
            extract_coordinates(r, frame=self.frame)

    def test_GIVEN_perturbed_moved_wall_WHEN_field_decomposed_THEN_symmetry_recovered(self):
        """
        Test decompose_field on R_theta (M0 + W)(x - sigma)
        """
        remainder = perturbation_in_e(self.grid, 1e-3)
        decomposition = decompose_field(perturbed_wall(remainder, 0.05, -0.1), self.frame)
        self.assertAlmostEqual(decomposition.theta, 0.05, delta=2e-3)
        self.assertAlmostEqual(decomposition.sigma, -0.1, delta=2e-3)


class LyapunovTests(unittest.TestCase):
    """
    Unit tests for V(W) = 1/2 |L W1|^2 + 1/2 |L W2|^2
    """

    def test_GIVEN_zero_WHEN_lyapunov_THEN_zero(self):
        """
        Test V(0) = 0
        """
        self.assertEqual(lyapunov_v(PairField.zeros(test_data.coarse_grid)), 0.0)

    @patch("decomposition_stability.print_and_log")
    def test_GIVEN_kernel_direction_WHEN_lyapunov_THEN_truncation_small_and_warning_logged(self, print_and_log):
        """
        Test V(a1) = O(h^4) and that evaluating V off the kernel complement is reported
        """
        first, _ = kernel_basis(test_data.default_grid)
        self.assertLess(lyapunov_v(first), 1e-6)
        print_and_log.assert_called_once()
        self.assertEqual(print_and_log.call_args[0][1], Severity.MINOR)

    def test_GIVEN_remainders_WHEN_lyapunov_THEN_equivalent_to_squared_h2_norm(self):
        """
        Test sqrt(V(W)) >= 0.3 |W|_H2 for W orthogonal to the kernel
        """
        grid = test_data.coarse_grid
        for seed in range(100):
            remainder = perturbation_in_e(grid, 1.0, seed=seed)
            self.assertGreaterEqual(math.sqrt(lyapunov_v(remainder)), 0.3 * h2_norm_pair(remainder))

    def test_GIVEN_small_remainder_WHEN_kernel_added_THEN_lyapunov_almost_unchanged(self):
        """
        Test |V(W + eps a1 + eps a2) - V(W)| <= 1e-6 eps
        """
        grid = test_data.default_grid
        remainder = perturbation_in_e(grid, 1e-4)
        first, second = kernel_basis(grid)
        epsilon = 1e-2
        with patch("decomposition_stability.print_and_log"):
            moved = lyapunov_v(remainder + first.scaled(epsilon) + second.scaled(epsilon))
        self.assertLess(abs(moved - lyapunov_v(remainder)), 1e-6 * epsilon)


class SpectralTests(unittest.TestCase):
    """
    Unit tests for the spectrum of the discrete L
    """

    @classmethod
    def setUpClass(cls):
        """
        Set up the spectral report on the default grid once
        """
        cls.report = spectral_report(test_data.default_grid)

    def test_GIVEN_default_grid_WHEN_spectrum_THEN_bound_state_near_zero_with_sech_shape(self):
        """
        Test |lambda_1| <= 1e-3 and |<phi_1, sech/|sech|>| >= 0.999
        """
        self.assertLess(abs(self.report.kernel_eigenvalue), 1e-3)
        self.assertGreaterEqual(self.report.kernel_overlap, 0.999)

    def test_GIVEN_default_grid_WHEN_spectrum_THEN_gap_to_continuum_at_minus_one(self):
        """
        Test lambda_2 in [-1.05, -0.90] and a descending order
        """
        self.assertGreaterEqual(self.report.second_eigenvalue, -1.05)
        self.assertLessEqual(self.report.second_eigenvalue, -0.90)
        self.assertTrue(np.all(np.diff(self.report.eigenvalues) <= 0.0))
        self.assertEqual(len(self.report.eigenvalues), 6)

    def test_GIVEN_spectrum_WHEN_A_eigenvalues_THEN_one_plus_minus_i_times_L_eigenvalues(self):
        """
        Test the spectrum of A = JL off the kernel and the linearised decay rate
        """
        self.assertTrue(np.allclose(self.report.a_eigenvalues.real, np.tile(self.report.eigenvalues[1:], 2)))
        self.assertAlmostEqual(linearized_rate(self.report), -self.report.second_eigenvalue, places=15)
        self.assertGreater(linearized_rate(self.report), 0.9)

    def test_GIVEN_bound_state_WHEN_grid_refined_THEN_error_drops_by_four(self):
        """
        Test that lambda_1 converges to 0 at second order
        """
        coarse = spectral_report(test_data.medium_grid, k=2).kernel_eigenvalue
        ratio = coarse / self.report.kernel_eigenvalue
        self.assertGreater(ratio, 3.2)
        self.assertLess(ratio, 4.8)

    def test_GIVEN_too_many_nodes_or_bad_k_WHEN_spectrum_THEN_value_error(self):
        """
        Test the size limit of the dense eigensolver and the range of k
        """
        with self.assertRaises(ValueError):
            spectral_report(Grid(20.0, 4099))
        with self.assertRaises(ValueError):
            spectral_report(test_data.coarse_grid, k=1)


class DecayFitTests(unittest.TestCase):
    """
    Unit tests for exponential decay fits
    """

    def test_GIVEN_exact_exponential_WHEN_fitted_THEN_rate_and_perfect_fit(self):
        """
        Test a fit of exp(-t) on t = 0, ..., 10
        """
        times = np.arange(11.0)
        rate, r_squared = decay_fit(times, np.exp(-times))
        self.assertAlmostEqual(rate, 1.0, delta=1e-10)
        self.assertAlmostEqual(r_squared, 1.0, delta=1e-12)

    def test_GIVEN_window_WHEN_fitted_THEN_samples_outside_ignored(self):
        """
        Test that a transient before skip does not change the rate
        """
        times = np.linspace(0.0, 20.0, 81)
        values = np.exp(-0.5 * times)
        values[times < 2.0] = 5.0
        rate, _ = decay_fit(times, values, skip=2.0, stop=15.0)
        self.assertAlmostEqual(rate, 0.5, delta=1e-10)

    def test_GIVEN_constant_series_WHEN_fitted_THEN_zero_rate(self):
        """
        Test that a constant series has rate 0
        """
        self.assertEqual(decay_fit(np.arange(12.0), np.full(12, 3.0)), (0.0, 1.0))

    def test_GIVEN_few_samples_or_non_positive_values_WHEN_fitted_THEN_decay_fit_error(self):
        """
        Test the rejected inputs of the fit
        """
        with self.assertRaises(DecayFitError):
            decay_fit(np.arange(5.0), np.exp(-np.arange(5.0)))
        values = np.exp(-np.arange(12.0))
        values[4] = 0.0
        with self.assertRaises(DecayFitError):
            decay_fit(np.arange(12.0), values)


class PerturbationTests(unittest.TestCase):
    """
    Unit tests for the perturbations in the kernel complement
    """

    def setUp(self):
        """
        Set up the test case
        """
        self.grid = test_data.coarse_grid

    def test_GIVEN_amplitude_WHEN_perturbation_built_THEN_orthogonal_with_requested_norm(self):
        """
        Test <W, a_i> = 0 and |W|_H2 = amplitude
        """
        remainder = perturbation_in_e(self.grid, 1e-3)
        for mode in kernel_basis(self.grid):
            self.assertLess(abs(inner_pair(remainder, mode)), 1e-15)
        self.assertAlmostEqual(h2_norm_pair(remainder), 1e-3, delta=1e-15)

    def test_GIVEN_same_seed_WHEN_perturbation_built_twice_THEN_identical(self):
        """
        Test that perturbations are reproducible
        """
        first = perturbation_in_e(self.grid, 1e-3, seed=3)
        second = perturbation_in_e(self.grid, 1e-3, seed=3)
        self.assertTrue(np.array_equal(first.stack(), second.stack()))
        self.assertFalse(np.array_equal(first.stack(), perturbation_in_e(self.grid, 1e-3, seed=4).stack()))

    def test_GIVEN_zero_amplitude_WHEN_perturbation_built_THEN_zero(self):
        """
        Test the unperturbed case
        """
        self.assertEqual(perturbation_in_e(self.grid, 0.0).sup_norm(), 0.0)

    def test_GIVEN_pair_WHEN_kernel_projected_out_THEN_orthogonal_and_idempotent(self):
        """
        Test the projection onto the kernel complement
        """
        projected = project_out_kernel(test_data.standard_pair(self.grid))
        for mode in kernel_basis(self.grid):
            self.assertLess(abs(inner_pair(projected, mode)), 1e-15)
        self.assertLess((project_out_kernel(projected) - projected).sup_norm(), 1e-15)

    def test_GIVEN_remainder_WHEN_perturbed_wall_built_THEN_field_on_sphere_near_wall(self):
        """
        Test that the perturbed wall is a unit field with coordinates W
        """
        remainder = perturbation_in_e(self.grid, 1e-2)
        u = perturbed_wall(remainder)
        self.assertIsInstance(u, SpinField)
        decomposition = decompose_field(u)
        self.assertLess(abs(decomposition.theta) + abs(decomposition.sigma), 1e-9)


class RemainderDecayTests(unittest.TestCase):
    """
    Unit tests for the decay of W along the flow without applied field
    """

    @classmethod
    def setUpClass(cls):
        """
        Simulate a perturbed standing wall once and decompose every output
        """
        grid = test_data.coarse_grid
        schedule = ControlSchedule.constant(0.0)
        cls.tracker = NominalFrameTracker(grid, schedule, 0.0, 0.0)
        cfg = SimConfig.from_cfl(grid, 20.0, output_interval=0.25)
        simulate(perturbed_wall(perturbation_in_e(grid, 1e-3)), schedule, cfg, diagnostics=cls.tracker)

    def test_GIVEN_perturbed_wall_WHEN_remainder_fitted_THEN_decay_rate_near_one(self):
        """
        Test that |W - W_end|_H2 decays at the rate of the gap of L
        """
        times, remainders = self.tracker.remainder_series(0.0, 20.0)
        values = [h2_norm_pair(remainder) for remainder in remainders[:-1]]
        rate, _ = decay_fit(times[:-1], values, skip=3.0, stop=12.0)
        self.assertGreater(rate, 0.8)
        self.assertLess(rate, 1.2)

    def test_GIVEN_perturbed_wall_WHEN_lyapunov_followed_THEN_non_increasing(self):
        """
        Test that V(W - W_end) does not increase after the initial transient
        """
        times, remainders = self.tracker.remainder_series(0.0, 20.0)
        with patch("decomposition_stability.print_and_log"):
            values = [lyapunov_v(remainder) for time, remainder in zip(times, remainders) if time >= 1.0]
        self.assertTrue(all(later <= earlier + 1e-8 for earlier, later in zip(values, values[1:])))

    def test_GIVEN_perturbed_wall_WHEN_symmetry_followed_THEN_converges(self):
        """
        Test that Lambda(t) settles
        """
        thetas = [decomposition.theta for decomposition in self.tracker.decompositions]
        sigmas = [decomposition.sigma for decomposition in self.tracker.decompositions]
        self.assertLess(abs(thetas[-1] - thetas[-2]) + abs(sigmas[-1] - sigmas[-2]), 1e-6)

    def test_GIVEN_perturbed_wall_WHEN_symmetry_increments_summed_THEN_shrink_window_over_window(self):
        """
        Test that the increments of Lambda(t) over [1, 3], [3, 5] and [5, 7] shrink at least by half each time
        """
        times = np.array(self.tracker.times)
        thetas = np.array([decomposition.theta for decomposition in self.tracker.decompositions])
        sigmas = np.array([decomposition.sigma for decomposition in self.tracker.decompositions])
        increments = np.abs(np.diff(thetas)) + np.abs(np.diff(sigmas))

        def window_sum(start, end):
            return float(np.sum(increments[(times[1:] > start) & (times[1:] <= end)]))

        first, second, third = window_sum(1.0, 3.0), window_sum(3.0, 5.0), window_sum(5.0, 7.0)
        self.assertGreater(first, 0.0)
        self.assertLessEqual(second, 0.5 * first)
        self.assertLessEqual(third, 0.5 * second + 1e-10)


if __name__ == "__main__":
    unittest.main()
