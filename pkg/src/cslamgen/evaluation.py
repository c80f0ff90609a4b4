"""
Dataset statistics and the odometry baseline: dead reckoning and unaligned mean APE.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from .model import MultiGraph, RelativeMeasurement, ScaledPose, compose, positions


class DatasetStats(BaseModel):
    """Node and constraint counts of a multi-agent dataset."""

    n_agents: int
    nodes_per_agent: List[int]
    odometry_edges: int
    intra_lc_count: int
    inter_lc_count: int
    total_constraints: int

    @property
    def loop_closures(self) -> int:
        return self.intra_lc_count + self.inter_lc_count


class ApeReport(BaseModel):
    """Unaligned translational APE of the vertex estimates, per agent and pooled."""

    per_agent: Dict[int, float] = Field(default_factory=dict)
    pooled: Optional[float] = None
    available: bool = True


def dead_reckon(odometry: Sequence[RelativeMeasurement], initial: ScaledPose) -> List[ScaledPose]:
    """
    Compose relative measurements from a known start.

    Args:
        odometry: Measurements, each in the frame of the previous pose
        initial: Starting pose

    Returns:
        ``len(odometry) + 1`` poses starting with ``initial``
    """
    poses = [initial]
    for meas in odometry:
        poses.append(compose(poses[-1], meas))
    return poses


def _translation_errors(estimate: Sequence[ScaledPose], truth: Sequence[ScaledPose]) -> np.ndarray:
    if len(estimate) != len(truth):
        raise ValueError(f"Trajectory lengths differ: {len(estimate)} estimates vs {len(truth)} ground-truth poses")
    if not estimate:
        return np.zeros(0)
    return np.linalg.norm(positions(estimate) - positions(truth), axis=1)


def mean_ape_translation(estimate: Sequence[ScaledPose], truth: Sequence[ScaledPose]) -> float:
    """Mean Euclidean distance between estimated and true positions, no alignment applied."""
    errors = _translation_errors(estimate, truth)
    if errors.size == 0:
        raise ValueError("Cannot compute APE of empty trajectories")
    return float(errors.mean())


def dataset_stats(multi: MultiGraph) -> DatasetStats:
    """Exact node and edge counts; total constraints = odometry + intra + inter."""
    odometry = sum(len(agent.odometry) for agent in multi.agents)
    intra = sum(len(agent.intra_lc) for agent in multi.agents)
    inter = len(multi.inter_lc)
    return DatasetStats(
        n_agents=multi.n_agents,
        nodes_per_agent=[agent.node_count for agent in multi.agents],
        odometry_edges=odometry,
        intra_lc_count=intra,
        inter_lc_count=inter,
        total_constraints=odometry + intra + inter,
    )


def agent_ape(multi: MultiGraph) -> ApeReport:
    """
    APE of every agent's vertex estimates against its ground truth.

    The pooled value averages over all nodes of all agents. Agents without
    ground truth make the report unavailable.
    """
    if any(not agent.ground_truth for agent in multi.agents):
        return ApeReport(available=False)
    per_agent: Dict[int, float] = {}
    pooled_errors = []
    for idx, agent in enumerate(multi.agents):
        errors = _translation_errors(agent.estimates, multi.scaled_ground_truth(idx))
        per_agent[idx] = float(errors.mean())
        pooled_errors.append(errors)
    pooled = float(np.concatenate(pooled_errors).mean())
    return ApeReport(per_agent=per_agent, pooled=pooled)
