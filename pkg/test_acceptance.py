"""
Contains the desk-scale acceptance runs at the default grid. They take several minutes and run
only when LLG_RUN_ACCEPTANCE=1.
"""

import os
import unittest
from tempfile import TemporaryDirectory

import numpy as np  # pylint: disable=import-error
from mock import patch  # pylint: disable=import-error

from analytic_walls import mobile_frame, wall_field
from config import ConfigKey, Defaults, load_config
from control_experiments import (
    NominalFrameTracker,
    fit_slope,
    reduce_check,
    run_theorem1,
    sample_admissible_pair,
    track_wall,
    unwrap_phase,
    wall_residual_sweep,
)
from decomposition_stability import (
    decay_fit,
    extract_coordinates,
    jacobian_h,
    linearized_rate,
    lyapunov_v,
    perturbation_in_e,
    perturbed_wall,
    r_of_lambda,
    spectral_report,
)
from field_core import ControlSchedule, WallParams, h2_dist, h2_norm_pair
from frame_reduction import op_J_eigenvalues
from llg_dynamics import SimConfig, residual_travelling_wall, rhs_lab, simulate
from test_utils import test_data

# pylint: disable=line-too-long, invalid-name

RUN_ACCEPTANCE = os.getenv("LLG_RUN_ACCEPTANCE") == "1"


@unittest.skipUnless(RUN_ACCEPTANCE, "set LLG_RUN_ACCEPTANCE=1 to run the desk-scale acceptance runs")
class AcceptanceTests(unittest.TestCase):
    """
    Acceptance runs on X = 20, N = 1025, dt = 0.25 h^2
    """

    def setUp(self):
        """
        Set up the test case
        """
        self.grid = test_data.default_grid

    def test_GIVEN_standing_wall_WHEN_run_to_fifty_THEN_stays_and_drift_falls_with_h(self):
        """
        Test the drift of M0 to t = 50 and its second order decrease
        """
        drifts = []
        for grid in (test_data.medium_grid, self.grid):
            cfg = SimConfig.from_cfl(grid, 50.0, output_interval=50.0)
            trajectory = simulate(wall_field(grid), ControlSchedule.constant(0.0), cfg)
            self.assertLess(max(record.norm_drift for record in trajectory.diagnostics), 1e-12)
            drifts.append(h2_dist(trajectory.final, wall_field(grid)))
        self.assertLessEqual(drifts[1], 2e-3)
        self.assertGreaterEqual(drifts[0] / drifts[1], 3.0)

    def test_GIVEN_travelling_walls_WHEN_residual_swept_THEN_small_second_order_and_invariant(self):
        """
        Test the residual of the exact travelling walls
        """
        grids = [test_data.medium_grid, self.grid, self.grid.refined()]
        rows = wall_residual_sweep([0.0, 0.05, 0.1], grids)
        for index in range(0, len(rows), 3):
            residuals = [row[2] for row in rows[index : index + 3]]
            self.assertLess(residuals[2], 5e-3)
            for coarse, fine in zip(residuals, residuals[1:]):
                self.assertGreater(coarse / fine, 3.2)
                self.assertLess(coarse / fine, 4.8)
        moved = residual_travelling_wall(WallParams(0.05, 0.7, 0.0), self.grid)
        self.assertAlmostEqual(moved, rows[4][2], delta=1e-12)

    def test_GIVEN_constant_field_WHEN_wall_followed_to_forty_THEN_speed_and_rotation_delta(self):
        """
        Test sigma' = -delta and theta' = delta over t in [5, 40]
        """
        delta = 0.05
        cfg = SimConfig.from_cfl(self.grid, 40.0, output_interval=0.5)

        def wall_diagnostics(_time, u, _delta):
            estimate = track_wall(u)
            return {"sigma_est": estimate.sigma_est, "theta_est": estimate.theta_est}

        trajectory = simulate(wall_field(self.grid), ControlSchedule.constant(delta), cfg, diagnostics=wall_diagnostics)
        late = [record for record in trajectory.diagnostics if record.t >= 5.0]
        times = [record.t for record in late]
        self.assertAlmostEqual(fit_slope(times, [record.sigma_est for record in late]), -delta, delta=0.01 * delta)
        self.assertAlmostEqual(fit_slope(times, unwrap_phase([record.theta_est for record in late])), delta, delta=0.01 * delta)

    def test_GIVEN_twenty_admissible_samples_WHEN_reduction_checked_THEN_agreement_to_round_off(self):
        """
        Test the reduced right-hand side against the lift-project oracle
        """
        rng = np.random.default_rng(Defaults.defaults[ConfigKey.SEED])
        for _ in range(20):
            _, _, error = reduce_check(sample_admissible_pair(self.grid, rng), rng.uniform(-1.0, 1.0))
            self.assertLess(error, 1e-10)

    def test_GIVEN_default_grid_WHEN_spectrum_computed_THEN_bound_state_gap_and_J(self):
        """
        Test the spectral facts of L and J
        """
        report = spectral_report(self.grid)
        self.assertLessEqual(abs(report.kernel_eigenvalue), 1e-3)
        self.assertGreaterEqual(report.kernel_overlap, 0.999)
        self.assertTrue(-1.05 <= report.second_eigenvalue <= -0.90)
        self.assertTrue(np.allclose(op_J_eigenvalues(), [1.0 - 1.0j, 1.0 + 1.0j], atol=1e-15))

    def test_GIVEN_symmetry_grid_WHEN_extracted_THEN_identity_and_jacobian_minus_two(self):
        """
        Test the splitting over [-0.3, 0.3] x [-1, 1] on the default grid
        """
        frame = mobile_frame(self.grid)
        for theta in np.linspace(-0.3, 0.3, 5):
            for sigma in np.linspace(-1.0, 1.0, 5):
                decomposition = extract_coordinates(r_of_lambda((theta, sigma), self.grid, frame), chart_radius=0.9, frame=frame)
                self.assertAlmostEqual(decomposition.theta, theta, delta=1e-10)
                self.assertAlmostEqual(decomposition.sigma, sigma, delta=1e-10)
        self.assertTrue(np.allclose(jacobian_h((0.0, 0.0), self.grid, frame=frame), -2.0 * np.eye(2), atol=1e-6))

    def test_GIVEN_perturbed_standing_wall_WHEN_run_THEN_lyapunov_decreases_and_rate_matches_spectrum(self):
        """
        Test the decay of W against the linearised rate
        """
        schedule = ControlSchedule.constant(0.0)
        tracker = NominalFrameTracker(self.grid, schedule, 0.0, 0.0)
        cfg = SimConfig.from_cfl(self.grid, 20.0, output_interval=0.25)
        simulate(perturbed_wall(perturbation_in_e(self.grid, 1e-3)), schedule, cfg, diagnostics=tracker)
        times, remainders = tracker.remainder_series(0.0, 20.0)
        with patch("decomposition_stability.print_and_log"):
            values = [lyapunov_v(remainder) for time, remainder in zip(times, remainders) if time >= 1.0]
        self.assertTrue(all(later <= earlier + 1e-8 for earlier, later in zip(values, values[1:])))
        rate, _ = decay_fit(times[:-1], [h2_norm_pair(remainder) for remainder in remainders[:-1]], skip=3.0, stop=12.0)
        self.assertGreaterEqual(rate, 0.8)
        self.assertLessEqual(rate, 1.2)
        self.assertAlmostEqual(rate, linearized_rate(spectral_report(self.grid)), delta=0.2)

    def test_GIVEN_default_steering_config_WHEN_run_twice_THEN_criteria_pass_and_outputs_identical(self):
        """
        Test the steering experiment at the default grid and its determinism
        """
        settings = load_config(os.path.join(os.path.dirname(os.path.realpath(__file__)), "configs", "theorem1.cfg"))
        with TemporaryDirectory() as first_dir, TemporaryDirectory() as second_dir:
            report = run_theorem1(settings, first_dir)
            run_theorem1(settings, second_dir)
            for name in os.listdir(first_dir):
                with open(os.path.join(first_dir, name), mode="rb") as first, open(os.path.join(second_dir, name), mode="rb") as second:
                    self.assertEqual(first.read(), second.read(), name)
            diagnostics = np.genfromtxt(os.path.join(first_dir, "diagnostics.csv"), delimiter=",", skip_header=1)
        self.assertLessEqual(report.distance_at_T, 0.05)
        self.assertLessEqual(report.lambda_error, 0.05)
        self.assertTrue(report.passed)
        self.assertLessEqual(np.max(diagnostics[:, 2]), 1e-12)

    def test_GIVEN_random_unit_fields_WHEN_rhs_evaluated_THEN_tangent(self):
        """
        Test <rhs, u> <= 1e-12 at every node for 100 random unit fields on the coarse grid
        """
        for seed in range(100):
            u = test_data.random_unit_field(test_data.coarse_grid, seed)
            self.assertLess(np.max(np.abs(np.einsum("ij,ij->i", rhs_lab(u, 0.07), u.values))), 1e-12)


if __name__ == "__main__":
    unittest.main()
