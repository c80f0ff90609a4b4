"""
Tests for the scaling benchmark helpers.
"""

import io
import unittest
from unittest.mock import patch

import pytest

from cslamgen.bench import BenchmarkRunner, BenchRow, config_for, linear_fit_r2, successive_ratios, write_csv
from cslamgen.config import GenerationConfig, InitialPose, LoopClosureParams, SweepParameter


class TestConfigFor(unittest.TestCase):
    """Test cases for config_for."""

    def setUp(self):
        self.base = GenerationConfig(
            n_agents=2,
            n_steps=100,
            n_steps_per_agent=[100, 50],
            initial_poses=[InitialPose(x=0, y=0, heading=0), InitialPose(x=3, y=1, heading=1)],
            intra_lc=LoopClosureParams(radius=1.0, prob_at_zero=0.4),
        )

    def test_agents_drops_per_agent_lists(self):
        cfg = config_for(self.base, SweepParameter.AGENTS, 5)
        self.assertEqual(cfg.n_agents, 5)
        self.assertIsNone(cfg.n_steps_per_agent)
        self.assertIsNone(cfg.initial_poses)

    def test_steps(self):
        cfg = config_for(self.base, SweepParameter.STEPS, 400.0)
        self.assertEqual(cfg.n_steps, 400)
        self.assertIsInstance(cfg.n_steps, int)
        self.assertIsNone(cfg.n_steps_per_agent)
        self.assertEqual(cfg.initial_poses, self.base.initial_poses)

    def test_radius_sets_both_kinds(self):
        cfg = config_for(self.base, SweepParameter.RADIUS, 3)
        self.assertEqual(cfg.intra_lc.radius, 3.0)
        self.assertEqual(cfg.inter_lc.radius, 3.0)
        self.assertEqual(cfg.intra_lc.prob_at_zero, 0.4)

    def test_invalid_value(self):
        with self.assertRaises(ValueError):
            config_for(self.base, SweepParameter.STEPS, 0)


class TestFitHelpers(unittest.TestCase):
    """Test cases for linear_fit_r2 and successive_ratios."""

    def test_perfect_line(self):
        self.assertAlmostEqual(linear_fit_r2([1, 2, 3, 4], [3, 5, 7, 9]), 1.0)

    def test_constant(self):
        self.assertEqual(linear_fit_r2([1, 2, 3], [2, 2, 2]), 1.0)

    def test_poor_fit(self):
        self.assertLess(linear_fit_r2([1, 2, 3, 4], [1, 4, 1, 4]), 0.5)

    def test_too_few_points(self):
        with self.assertRaises(ValueError):
            linear_fit_r2([1], [1])
        with self.assertRaises(ValueError):
            linear_fit_r2([1, 2], [1, 2, 3])

    def test_successive_ratios(self):
        self.assertEqual(successive_ratios([1.0, 2.0, 8.0]), [2.0, 4.0])
        self.assertEqual(successive_ratios([5.0]), [])


class TestWriteCsv(unittest.TestCase):
    """Test cases for write_csv."""

    def test_rows(self):
        stream = io.StringIO()
        write_csv([BenchRow("steps", 500.0, 0.1234567, 0.1, 0.2, 3)], stream)
        self.assertEqual(
            stream.getvalue(),
            "parameter,value,median_seconds,min_seconds,max_seconds,repetitions\n"
            "steps,500.0,0.123457,0.100000,0.200000,3\n",
        )


class TestBenchmarkRunner(unittest.TestCase):
    """Test cases for BenchmarkRunner."""

    def setUp(self):
        self.base = GenerationConfig(n_agents=2, n_steps=30)

    def test_sweep_reports_median(self):
        runner = BenchmarkRunner()
        with patch.object(runner, "time_once", side_effect=[0.3, 0.1, 0.2, 1.0, 3.0, 2.0]) as timer:
            rows = runner.sweep(SweepParameter.STEPS, [10, 20], repetitions=3, base=self.base)
        self.assertEqual(timer.call_count, 6)
        self.assertEqual(rows[0], BenchRow("steps", 10, 0.2, 0.1, 0.3, 3))
        self.assertEqual(rows[1], BenchRow("steps", 20, 2.0, 1.0, 3.0, 3))
        self.assertEqual(timer.call_args.args[0].n_steps, 20)

    def test_sweep_runs_generation(self):
        rows = BenchmarkRunner(include_io=True).sweep(SweepParameter.AGENTS, [1, 2], repetitions=1, base=self.base)
        self.assertEqual([row.value for row in rows], [1, 2])
        self.assertTrue(all(row.median_seconds > 0 for row in rows))

    def test_repetitions_validated(self):
        with self.assertRaises(ValueError):
            BenchmarkRunner().sweep(SweepParameter.STEPS, [10], repetitions=0, base=self.base)


@pytest.mark.slow
class TestScalingTrends(unittest.TestCase):
    """Wall-time trends of generation; medians over several runs."""

    def setUp(self):
        self.runner = BenchmarkRunner(max_workers=1)

    def medians(self, param, values, base):
        return [row.median_seconds for row in self.runner.sweep(param, values, repetitions=5, base=base)]

    def test_time_linear_in_steps(self):
        values = [2000, 4000, 6000, 8000, 10000]
        times = self.medians(SweepParameter.STEPS, values, GenerationConfig(n_agents=2))
        self.assertGreaterEqual(linear_fit_r2(values, times), 0.98)

    def test_time_linear_in_agents(self):
        values = [1, 2, 4, 8]
        times = self.medians(SweepParameter.AGENTS, values, GenerationConfig(n_steps=3000))
        self.assertGreaterEqual(linear_fit_r2(values, times), 0.98)

    def test_time_superlinear_in_radius(self):
        base = GenerationConfig(n_agents=2, n_steps=5000)
        times = self.medians(SweepParameter.RADIUS, [1, 2, 4, 8], base)
        ratios = successive_ratios(times)
        self.assertTrue(all(b > a for a, b in zip(ratios, ratios[1:])), ratios)


if __name__ == '__main__':
    unittest.main()
