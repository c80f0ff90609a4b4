"""
Tests for measurement noise models and information matrices.
"""

import math
import unittest

import numpy as np
import pytest
from scipy import stats

from cslamgen.config import InfoMode, LoopClosureParams, OdomNoiseParams
from cslamgen.exceptions import NumericalError
from cslamgen.model import ScaledPose
from cslamgen.noise import (
    lc_information,
    lc_measurement,
    lc_measurements,
    odom_information,
    odom_information_exact,
    odometry_covariance_exact,
    odometry_measurement,
    odometry_measurements,
)
from cslamgen.rng import ODOMETRY, derive_stream

ZERO_ODOM = OdomNoiseParams(sigma_pos=0.0, sigma_ang=0.0)
ZERO_LC = LoopClosureParams(sigma_pos=0.0, sigma_ang=0.0)
DIAG_0023 = 1.0 / 0.023**2


def straight_line(n):
    return [ScaledPose(float(k), 0.0, 0.0) for k in range(n + 1)]


def sample_odometry(phi, ell, sigma_pos, sigma_ang, n, seed=0):
    """Draws of (dx, dy, dtheta) with dtheta left unwrapped."""
    rng = np.random.default_rng(seed)
    n_len, n_ang = rng.standard_normal((2, n))
    theta = phi + sigma_ang * n_ang
    length = ell + sigma_pos * n_len
    return np.vstack([length * np.cos(theta), length * np.sin(theta), theta])


class TestOdometryMeasurement(unittest.TestCase):
    """Test cases for the odometry measurement model."""

    def test_zero_noise_straight(self):
        meas = odometry_measurement(ScaledPose(0, 0, 0), ScaledPose(1, 0, 0), ZERO_ODOM, derive_stream(0, ODOMETRY, 0))
        self.assertEqual((meas.dx, meas.dy, meas.dtheta), (1.0, 0.0, 0.0))
        self.assertIsNone(meas.info)

    def test_zero_noise_left_turn(self):
        meas = odometry_measurement(
            ScaledPose(0, 0, 0), ScaledPose(0, 1, math.pi / 2), ZERO_ODOM, derive_stream(0, ODOMETRY, 0)
        )
        self.assertAlmostEqual(meas.dx, 0.0, places=12)
        self.assertAlmostEqual(meas.dy, 1.0, places=12)
        self.assertAlmostEqual(meas.dtheta, math.pi / 2, places=12)

    def test_angle_wrapped(self):
        meas = odometry_measurement(
            ScaledPose(0, 0, -math.pi), ScaledPose(0, 1, math.pi / 2), ZERO_ODOM, derive_stream(0, ODOMETRY, 0)
        )
        self.assertAlmostEqual(meas.dtheta, -math.pi / 2, places=12)

    def test_batch_consumes_stream_like_single_calls(self):
        poses = [ScaledPose(0, 0, 0), ScaledPose(1, 0, 0), ScaledPose(1, 1, math.pi / 2), ScaledPose(0, 1, -math.pi)]
        p = OdomNoiseParams(sigma_pos=0.05, sigma_ang=0.02)
        rng_single = derive_stream(5, ODOMETRY, 1)
        rng_batch = derive_stream(5, ODOMETRY, 1)
        single = [odometry_measurement(a, b, p, rng_single) for a, b in zip(poses, poses[1:])]
        batch = odometry_measurements(poses, p, rng_batch)
        for s, b in zip(single, batch):
            self.assertAlmostEqual(s.dx, b.dx, places=12)
            self.assertAlmostEqual(s.dy, b.dy, places=12)
            self.assertAlmostEqual(s.dtheta, b.dtheta, places=12)
        self.assertEqual(rng_single.random(), rng_batch.random())

    def test_batch_of_single_pose(self):
        self.assertEqual(odometry_measurements([ScaledPose(0, 0, 0)], ZERO_ODOM, derive_stream(0, ODOMETRY, 0)), [])


@pytest.mark.statistical
class TestOdometryStatistics(unittest.TestCase):
    """Statistical checks of the odometry model."""

    def test_calibration_at_default_sigma(self):
        """Test that 10^5 straight-line measurements have std 0.023 within 1% and look Gaussian."""
        p = OdomNoiseParams(sigma_pos=0.023, sigma_ang=0.023)
        meas = odometry_measurements(straight_line(100000), p, derive_stream(2024, ODOMETRY, 0))
        dtheta = np.array([m.dtheta for m in meas])
        length = np.array([math.hypot(m.dx, m.dy) for m in meas])
        for sample in (dtheta, length):
            self.assertAlmostEqual(sample.std(ddof=1), 0.023, delta=0.01 * 0.023)
            result = stats.anderson(sample, dist="norm")
            self.assertLess(result.statistic, result.critical_values[-1])

    def test_bias(self):
        """Test E[dx] = l cos(phi) exp(-sigma_ang^2 / 2), which differs from l cos(phi)."""
        sigma_ang = 0.1
        samples = sample_odometry(0.0, 1.0, 0.023, sigma_ang, 1_000_000, seed=11)
        mean = samples[0].mean()
        stderr = samples[0].std(ddof=1) / math.sqrt(samples.shape[1])
        expected = math.exp(-sigma_ang**2 / 2)
        self.assertLess(abs(mean - expected), 3 * stderr)
        self.assertGreater(abs(mean - 1.0), 10 * stderr)


class TestLoopClosureMeasurement(unittest.TestCase):
    """Test cases for the loop-closure measurement model."""

    def setUp(self):
        self.rng = derive_stream(0, "test", 0)

    def test_self_closure(self):
        pose = ScaledPose(3.0, -2.0, math.pi / 2)
        meas = lc_measurement(pose, pose, ZERO_LC, self.rng)
        self.assertEqual((meas.dx, meas.dy, meas.dtheta), (0.0, 0.0, 0.0))

    def test_rotation_into_older_frame(self):
        meas = lc_measurement(ScaledPose(0, 2, math.pi / 2), ScaledPose(0, 0, math.pi / 2), ZERO_LC, self.rng)
        self.assertEqual((meas.dx, meas.dy, meas.dtheta), (2.0, 0.0, 0.0))

    def test_direct_evaluation(self):
        meas = lc_measurement(ScaledPose(3, 1, -math.pi / 2), ScaledPose(1, 1, 0), ZERO_LC, self.rng)
        self.assertEqual((meas.dx, meas.dy), (2.0, 0.0))
        self.assertAlmostEqual(meas.dtheta, -math.pi / 2, places=12)

    def test_batch_matches_single(self):
        p = LoopClosureParams(sigma_pos=0.1, sigma_ang=0.05)
        pairs = [
            (ScaledPose(0, 2, math.pi / 2), ScaledPose(0, 0, math.pi / 2)),
            (ScaledPose(3, 1, -math.pi / 2), ScaledPose(1, 1, 0)),
        ]
        rng_a = derive_stream(1, "test", 0)
        rng_b = derive_stream(1, "test", 0)
        single = [lc_measurement(i, j, p, rng_a) for i, j in pairs]
        batch = lc_measurements(pairs, p, rng_b)
        for s, b in zip(single, batch):
            self.assertAlmostEqual(s.dx, b.dx, places=12)
            self.assertAlmostEqual(s.dy, b.dy, places=12)
            self.assertAlmostEqual(s.dtheta, b.dtheta, places=12)

    @pytest.mark.statistical
    def test_unbiased_and_uncorrelated(self):
        p = LoopClosureParams(sigma_pos=0.05, sigma_ang=0.03)
        pose_i, pose_j = ScaledPose(2.0, 1.0, 0.0), ScaledPose(0.0, 0.0, math.pi / 2)
        n = 20000
        meas = lc_measurements([(pose_i, pose_j)] * n, p, derive_stream(8, "test", 0))
        values = np.array([[m.dx, m.dy, m.dtheta] for m in meas])
        truth = np.array([1.0, -2.0, -math.pi / 2])
        stderr = np.array([p.sigma_pos, p.sigma_pos, p.sigma_ang]) / math.sqrt(n)
        np.testing.assert_array_less(np.abs(values.mean(axis=0) - truth), 3 * stderr)
        corr = np.corrcoef(values.T)
        for r, c in ((0, 1), (0, 2), (1, 2)):
            self.assertLess(abs(corr[r, c]), 4 / math.sqrt(n))


class TestLoopClosureInformation(unittest.TestCase):
    """Test cases for lc_information."""

    def test_unit(self):
        info = lc_information(LoopClosureParams(sigma_pos=1.0, sigma_ang=1.0))
        self.assertEqual(info.upper_triangle(), (1.0, 0.0, 0.0, 1.0, 0.0, 1.0))

    def test_default_sigma(self):
        info = lc_information(LoopClosureParams())
        for value in (info.i11, info.i22, info.i33):
            self.assertAlmostEqual(value, 1890.359168, places=5)

    def test_mixed(self):
        info = lc_information(LoopClosureParams(sigma_pos=0.1, sigma_ang=0.01))
        self.assertAlmostEqual(info.i11, 100.0)
        self.assertAlmostEqual(info.i33, 10000.0)

    def test_zero_sigma_rejected(self):
        with self.assertRaises(ValueError):
            lc_information(LoopClosureParams(sigma_pos=0.0))


class TestOdometryInformation(unittest.TestCase):
    """Test cases for odometry information matrices."""

    def setUp(self):
        self.p = OdomNoiseParams(sigma_pos=0.023, sigma_ang=0.023)

    def test_x_move_correlates_y_and_theta(self):
        info = odom_information_exact(0.0, 1.0, self.p)
        self.assertAlmostEqual(info.i12, 0.0, delta=1e-9 * info.i11)
        self.assertAlmostEqual(info.i13, 0.0, delta=1e-9 * info.i11)
        self.assertGreater(abs(info.i23), 1.0)

    def test_y_move_correlates_x_and_theta(self):
        info = odom_information_exact(math.pi / 2, 1.0, self.p)
        self.assertGreater(abs(info.i13), 1.0)
        self.assertAlmostEqual(info.i23, 0.0, delta=1e-9 * info.i22)
        self.assertAlmostEqual(info.i12, 0.0, delta=1e-9 * info.i22)

    def test_positive_definite_for_all_turns(self):
        for sigma in (1e-3, 0.01, 0.023, 0.1, 0.5):
            p = OdomNoiseParams(sigma_pos=sigma, sigma_ang=sigma)
            for phi in (-math.pi, -math.pi / 2, 0.0, math.pi / 2, 0.3):
                for ell in (0.25, 1.0, 3.0):
                    info = odom_information_exact(phi, ell, p)
                    self.assertTrue(info.is_positive_definite())

    def test_inverse_of_covariance(self):
        cov = odometry_covariance_exact(0.0, 1.0, self.p)
        info = odom_information_exact(0.0, 1.0, self.p).as_array()
        np.testing.assert_allclose(info @ cov, np.eye(3), atol=1e-6)

    def test_zero_sigma_rejected(self):
        with self.assertRaises(ValueError):
            odom_information_exact(0.0, 1.0, OdomNoiseParams(sigma_pos=0.0, sigma_ang=0.023))

    def test_singular_covariance_reported(self):
        with self.assertRaises(NumericalError):
            odom_information_exact(0.0, 0.0, OdomNoiseParams(sigma_pos=1e-200, sigma_ang=0.023))

    def test_diagonal_mode(self):
        info = odom_information(InfoMode.DIAGONAL, 0.0, 1.0, self.p)
        self.assertAlmostEqual(info.i11, DIAG_0023, places=6)
        self.assertAlmostEqual(info.i22, DIAG_0023, places=6)
        self.assertAlmostEqual(info.i33, DIAG_0023, places=6)
        self.assertEqual((info.i12, info.i13, info.i23), (0.0, 0.0, 0.0))

    def test_exact_mode(self):
        self.assertNotEqual(odom_information(InfoMode.EXACT, 0.0, 1.0, self.p).i23, 0.0)

    def test_small_angle_noise_limit(self):
        """Test that as sigma_ang -> 0 the x entry tends to the diagonal one and y, theta stay coupled."""
        p = OdomNoiseParams(sigma_pos=0.023, sigma_ang=1e-6)
        info = odom_information_exact(0.0, 1.0, p)
        self.assertAlmostEqual(info.i11 / DIAG_0023, 1.0, places=6)
        cov = odometry_covariance_exact(0.0, 1.0, p)
        corr = cov[1, 2] / math.sqrt(cov[1, 1] * cov[2, 2])
        self.assertAlmostEqual(corr, 1.0 / math.sqrt(1.0 + 0.023**2), places=6)


@pytest.mark.statistical
@pytest.mark.slow
class TestExactCovarianceMonteCarlo(unittest.TestCase):
    """Closed-form odometry covariance against 10^6-sample Monte-Carlo estimates."""

    def check(self, phi, sigma):
        p = OdomNoiseParams(sigma_pos=sigma, sigma_ang=sigma)
        exact = odometry_covariance_exact(phi, 1.0, p)
        samples = sample_odometry(phi, 1.0, sigma, sigma, 1_000_000, seed=int(sigma * 1000) + int(phi * 10))
        empirical = np.cov(samples)
        n = samples.shape[1]
        for r in range(3):
            for c in range(r, 3):
                if abs(exact[r, c]) < 1e-15:
                    bound = 5 * math.sqrt(exact[r, r] * exact[c, c] / n)
                    self.assertLess(abs(empirical[r, c]), bound, msg=f"entry ({r},{c})")
                else:
                    rel = abs(empirical[r, c] - exact[r, c]) / abs(exact[r, c])
                    self.assertLess(rel, 0.02, msg=f"entry ({r},{c}) sigma={sigma} phi={phi}")

    def test_x_direction(self):
        for sigma in (0.01, 0.023, 0.1):
            self.check(0.0, sigma)

    def test_y_direction(self):
        for sigma in (0.01, 0.023, 0.1):
            self.check(math.pi / 2, sigma)

    def test_x_direction_correlation_pattern(self):
        exact = odometry_covariance_exact(0.0, 1.0, OdomNoiseParams(sigma_pos=0.023, sigma_ang=0.023))
        self.assertEqual(exact[0, 1], 0.0)
        self.assertEqual(exact[0, 2], 0.0)
        self.assertGreater(exact[1, 2], 0.0)


if __name__ == '__main__':
    unittest.main()
