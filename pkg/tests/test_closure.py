"""
Tests for the spatial index and loop-closure generation.
"""

import math
import unittest
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslamgen import closure
from cslamgen.closure import SpatialIndex, _accept, accept_probability, generate_all, inter_lc, intra_lc
from cslamgen.config import GenerationConfig, LoopClosureParams
from cslamgen.generator import DatasetGenerator
from cslamgen.model import AgentGraph, Edge, EdgeKind, GridPose, InformationMatrix, MultiGraph, RelativeMeasurement
from cslamgen.rng import INTER_LC, INTRA_LC, derive_stream
from cslamgen.walk import generate_trajectory


def agent_from_cells(cells):
    """Agent graph over grid cells (heading 0) with placeholder odometry."""
    poses = tuple(GridPose(x, y, 0) for x, y in cells)
    zero = RelativeMeasurement(0.0, 0.0, 0.0, InformationMatrix.identity())
    odometry = tuple(Edge(k, k + 1, zero, EdgeKind.ODOMETRY) for k in range(len(poses) - 1))
    return AgentGraph(ground_truth=poses, odometry=odometry)


def square_loop():
    """13 poses around a 3x3 square; nodes 0 and 12 share cell (0, 0)."""
    cells = [(0, 0), (1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (0, 3), (0, 2), (0, 1), (0, 0)]
    return agent_from_cells(cells)


def stream(seed=0):
    return derive_stream(seed, "test", 0)


class TestAcceptProbability(unittest.TestCase):
    """Test cases for accept_probability."""

    def test_examples(self):
        self.assertEqual(accept_probability(0.0, LoopClosureParams(prob_at_zero=0.5)), 0.5)
        p = LoopClosureParams(prob_at_zero=1.0, radius=2.0, decay_gain=5.0)
        self.assertAlmostEqual(accept_probability(2.0, p), math.exp(-5), places=12)
        self.assertAlmostEqual(accept_probability(2.0 / math.sqrt(5), p), math.exp(-1), places=12)

    def test_outside_radius(self):
        p = LoopClosureParams(prob_at_zero=1.0, radius=2.0)
        self.assertEqual(accept_probability(2.0001, p), 0.0)

    def test_zero_radius(self):
        p = LoopClosureParams(prob_at_zero=0.7, radius=0.0)
        self.assertEqual(accept_probability(0.0, p), 0.7)
        self.assertEqual(accept_probability(1.0, p), 0.0)

    def test_negative_distance(self):
        with self.assertRaises(ValueError):
            accept_probability(-1.0, LoopClosureParams())

    @pytest.mark.statistical
    def test_acceptance_rates(self):
        """Test empirical acceptance over 10^4 trials within 3 binomial sigma at d = 0, R/2, R."""
        p = LoopClosureParams(prob_at_zero=0.5, radius=4.0)
        n = 10000
        for seed, dist, expected in ((1, 0.0, 0.5), (2, 2.0, 0.5 * math.exp(-1.25)), (3, 4.0, 0.5 * math.exp(-5))):
            rate = _accept([dist] * n, p, stream(seed)).mean()
            sigma = math.sqrt(expected * (1 - expected) / n)
            self.assertLess(abs(rate - expected), 3 * sigma, msg=f"d={dist}")


cells = st.lists(st.tuples(st.integers(-8, 8), st.integers(-8, 8)), min_size=1, max_size=50)


class TestSpatialIndex(unittest.TestCase):
    """Test cases for SpatialIndex."""

    def test_every_pose_in_own_cell(self):
        poses = [GridPose(0, 0), GridPose(1, 0), GridPose(0, 0)]
        index = SpatialIndex.from_poses(poses)
        self.assertEqual(len(index), 3)
        self.assertEqual(index.cells()[(0, 0)], [0, 2])

    def test_negative_radius(self):
        with self.assertRaises(ValueError):
            SpatialIndex().query((0, 0), -1.0)

    @settings(max_examples=100)
    @given(cells, st.tuples(st.integers(-10, 10), st.integers(-10, 10)), st.floats(min_value=0.0, max_value=6.0))
    def test_query_matches_brute_force(self, occupied, center, radius):
        index = SpatialIndex.from_poses([GridPose(x, y) for x, y in occupied])
        found = sorted(index.query(center, radius))
        expected = sorted(
            (i, math.hypot(x - center[0], y - center[1]))
            for i, (x, y) in enumerate(occupied)
            if (x - center[0]) ** 2 + (y - center[1]) ** 2 <= radius * radius
        )
        self.assertEqual([i for i, _ in found], [i for i, _ in expected])
        for (_, d_found), (_, d_expected) in zip(found, expected):
            self.assertAlmostEqual(d_found, d_expected, places=12)


class TestIntraLoopClosures(unittest.TestCase):
    """Test cases for intra-agent loop closures."""

    def test_zero_radius_without_revisits(self):
        agent = agent_from_cells([(k, 0) for k in range(6)])
        self.assertEqual(intra_lc(agent, LoopClosureParams(prob_at_zero=1.0, radius=0.0), stream()), ())

    def test_revisit_always_closed_with_certain_acceptance(self):
        edges = intra_lc(square_loop(), LoopClosureParams(prob_at_zero=1.0, radius=0.5), stream())
        self.assertEqual([(e.from_id, e.to_id) for e in edges], [(0, 12)])
        self.assertEqual(edges[0].kind, EdgeKind.INTRA_LC)
        self.assertIsNotNone(edges[0].meas.info)

    def test_zero_probability(self):
        self.assertEqual(intra_lc(square_loop(), LoopClosureParams(prob_at_zero=0.0, radius=3.0), stream()), ())

    def test_neighbours_are_candidates(self):
        agent = agent_from_cells([(k, 0) for k in range(4)])
        p = LoopClosureParams(prob_at_zero=1.0, radius=1.0, decay_gain=1e-9)
        edges = intra_lc(agent, p, stream())
        self.assertEqual([(e.from_id, e.to_id) for e in edges], [(0, 1), (1, 2), (2, 3)])

    def test_measurement_in_older_frame(self):
        agent = square_loop()
        p = LoopClosureParams(prob_at_zero=1.0, radius=0.5, sigma_pos=1e-12, sigma_ang=1e-12)
        edge = intra_lc(agent, p, stream(), scale=2.0)[0]
        self.assertAlmostEqual(edge.meas.dx, 0.0, places=9)
        self.assertAlmostEqual(edge.meas.dy, 0.0, places=9)

    def test_unique_pairs(self):
        cfg = GenerationConfig(n_agents=1, n_steps=300, allow_reverse=True)
        traj = generate_trajectory(0, cfg, derive_stream(4, "walk", 0))
        agent = agent_from_cells([(p.x, p.y) for p in traj])
        edges = intra_lc(agent, LoopClosureParams(prob_at_zero=1.0, radius=2.0), stream())
        keys = [(e.from_id, e.to_id) for e in edges]
        self.assertEqual(len(keys), len(set(keys)))
        self.assertTrue(all(i < k for i, k in keys))

    def test_acceptance_monotone_in_probability(self):
        """Test that with a shared stream the accepted set only grows with p_lc."""
        cfg = GenerationConfig(n_agents=1, n_steps=200, allow_reverse=True)
        for seed in range(30):
            traj = generate_trajectory(0, cfg, derive_stream(seed, "walk", 0))
            agent = agent_from_cells([(p.x, p.y) for p in traj])
            low = intra_lc(agent, LoopClosureParams(prob_at_zero=0.2, radius=1.5), stream(seed))
            high = intra_lc(agent, LoopClosureParams(prob_at_zero=0.6, radius=1.5), stream(seed))
            self.assertTrue({(e.from_id, e.to_id) for e in low} <= {(e.from_id, e.to_id) for e in high})

    def test_count_grows_with_radius_on_average(self):
        cfg = GenerationConfig(n_agents=1, n_steps=200, allow_reverse=True)
        small, large = [], []
        for seed in range(30):
            traj = generate_trajectory(0, cfg, derive_stream(seed, "walk", 0))
            agent = agent_from_cells([(p.x, p.y) for p in traj])
            small.append(len(intra_lc(agent, LoopClosureParams(prob_at_zero=0.5, radius=1.0), stream(seed))))
            large.append(len(intra_lc(agent, LoopClosureParams(prob_at_zero=0.5, radius=3.0), stream(seed))))
        self.assertGreaterEqual(np.mean(large), np.mean(small))


class TestInterLoopClosures(unittest.TestCase):
    """Test cases for inter-agent loop closures."""

    def test_identical_trajectories(self):
        cells = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0), (-1, 0), (-1, -1), (0, -1), (0, 0), (1, 0), (2, 0)]
        a = agent_from_cells(cells)
        p = LoopClosureParams(prob_at_zero=1.0, radius=0.5)
        edges = inter_lc(a, a, (0, 1), p, stream())
        expected = sorted((i, j) for i, ci in enumerate(cells) for j, cj in enumerate(cells) if ci == cj)
        self.assertEqual([(e.node_a, e.node_b) for e in edges], expected)
        self.assertGreater(len(expected), len(cells))

    def test_separated_trajectories(self):
        a = agent_from_cells([(k, 0) for k in range(5)])
        b = agent_from_cells([(k, 10) for k in range(5)])
        self.assertEqual(inter_lc(a, b, (0, 1), LoopClosureParams(prob_at_zero=1.0, radius=3.0), stream()), ())

    def test_single_shared_cell(self):
        a = agent_from_cells([(0, 0), (1, 0), (2, 0)])
        b = agent_from_cells([(2, 5), (2, 4), (2, 3), (2, 2), (2, 1), (2, 0)])
        edges = inter_lc(a, b, (1, 3), LoopClosureParams(prob_at_zero=1.0, radius=0.5), stream())
        self.assertEqual(len(edges), 1)
        self.assertEqual(edges[0].key, (1, 2, 3, 5))

    def test_agent_order_enforced(self):
        a = agent_from_cells([(0, 0)])
        with self.assertRaises(ValueError):
            inter_lc(a, a, (1, 0), LoopClosureParams(), stream())

    def test_measurement_in_lower_agent_frame(self):
        a = AgentGraph(ground_truth=(GridPose(0, 0, 1),), odometry=())
        b = AgentGraph(ground_truth=(GridPose(0, 0, 0),), odometry=())
        p = LoopClosureParams(prob_at_zero=1.0, radius=0.5, sigma_pos=1e-12, sigma_ang=1e-12)
        edge = inter_lc(a, b, (0, 1), p, stream())[0]
        self.assertAlmostEqual(edge.meas.dtheta, -math.pi / 2, places=9)


class TestGenerateAll(unittest.TestCase):
    """Test cases for generate_all."""

    def multi(self, cfg):
        with DatasetGenerator(max_workers=1) as generator:
            trajs = generator.trajectories(cfg)
            info = generator._odometry_info(cfg)
            agents = tuple(generator.agent_graph(a, trajs[a], cfg, info) for a in range(cfg.n_agents))
        return MultiGraph(agents=agents, scale=cfg.scale)

    def test_single_agent_has_no_inter_edges(self):
        cfg = GenerationConfig(n_agents=1, n_steps=100)
        self.assertEqual(generate_all(self.multi(cfg), cfg).inter_lc, ())

    def test_one_stream_per_pair(self):
        cfg = GenerationConfig(n_agents=3, n_steps=50)
        multi = self.multi(cfg)
        with patch.object(closure, "derive_stream", wraps=derive_stream) as spy:
            generate_all(multi, cfg)
        purposes = [c.args[1:] for c in spy.call_args_list]
        self.assertEqual(sorted(p for p in purposes if p[0] == INTER_LC), [(INTER_LC, 0, 1), (INTER_LC, 0, 2), (INTER_LC, 1, 2)])
        self.assertEqual(sorted(p for p in purposes if p[0] == INTRA_LC), [(INTRA_LC, 0), (INTRA_LC, 1), (INTRA_LC, 2)])

    def test_deterministic_and_unique(self):
        cfg = GenerationConfig(n_agents=3, n_steps=200, master_seed=17,
                               inter_lc=LoopClosureParams(prob_at_zero=0.8, radius=2.0))
        multi = self.multi(cfg)
        first = generate_all(multi, cfg)
        second = generate_all(multi, cfg)
        self.assertEqual(first, second)
        keys = [e.key for e in first.inter_lc]
        self.assertEqual(len(keys), len(set(keys)))


if __name__ == '__main__':
    unittest.main()
