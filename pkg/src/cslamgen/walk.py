"""
Ground-truth random walks on the Manhattan grid and anchorpoint alignment.
"""

import math
from fractions import Fraction
from typing import List, Sequence, Tuple

from .config import GenerationConfig
from .logging_setup import get_logger
from .model import GridPose, wrap_quarter_turns
from .rng import RngStream

logger = get_logger(__name__)

Trajectory = Tuple[GridPose, ...]


def step(prev: GridPose, k: int, s: int, n_d: int, rng: RngStream) -> GridPose:
    """
    Propagate one step of the random walk.

    Turning is possible only when ``k % s == 0``; the turn is a uniform draw of
    quarter turns from {-2 + n_d, ..., 1}. The agent then advances one grid
    unit along its (new) heading.

    Args:
        prev: Pose at step k - 1
        k: Step index, starting at 1
        s: Steps between turns
        n_d: 0 allows the 180 degree turn, 1 excludes it
        rng: Walk stream of the agent

    Returns:
        Pose at step k
    """
    if k < 1:
        raise ValueError(f"Step index must be >= 1, got {k}")
    if n_d not in (0, 1):
        raise ValueError(f"n_d must be 0 or 1, got {n_d}")
    heading = prev.heading
    if k % s == 0:
        turn = int(rng.integers(-2 + n_d, 2))
        heading = wrap_quarter_turns(heading + turn)
    pose = GridPose(prev.x, prev.y, heading)
    dx, dy = pose.direction
    return GridPose(prev.x + dx, prev.y + dy, heading)


def generate_trajectory(agent: int, cfg: GenerationConfig, rng: RngStream) -> Trajectory:
    """Ground truth of one agent: the initial pose followed by n_steps walk steps."""
    n_steps = cfg.steps_for(agent)
    s = cfg.turn_interval_for(agent)
    poses = [cfg.initial_pose_for(agent)]
    for k in range(1, n_steps + 1):
        poses.append(step(poses[-1], k, s, cfg.n_d, rng))
    return tuple(poses)


def _anchorpoint_exact(traj: Sequence[GridPose]) -> Tuple[Fraction, Fraction]:
    if not traj:
        raise ValueError("Cannot compute the anchorpoint of an empty trajectory")
    n = len(traj)
    return Fraction(sum(p.x for p in traj), n), Fraction(sum(p.y for p in traj), n)


def anchorpoint(traj: Sequence[GridPose]) -> Tuple[float, float]:
    """Arithmetic mean of the trajectory positions."""
    ax, ay = _anchorpoint_exact(traj)
    return float(ax), float(ay)


def _round_half_up(value: Fraction) -> int:
    return math.floor(value + Fraction(1, 2))


def align(trajectories: Sequence[Sequence[GridPose]]) -> List[Trajectory]:
    """
    Translate every agent so its anchorpoint is as close as possible to agent 0's.

    Translations are whole grid vectors (the offset rounded per axis), so the
    poses stay on the grid; the residual is below half a unit per axis.
    Agent 0 and all headings are left unchanged.
    """
    if not trajectories:
        raise ValueError("Alignment needs at least one trajectory")
    ref_x, ref_y = _anchorpoint_exact(trajectories[0])
    aligned: List[Trajectory] = [tuple(trajectories[0])]
    for agent, traj in enumerate(trajectories[1:], start=1):
        ax, ay = _anchorpoint_exact(traj)
        dx = _round_half_up(ref_x - ax)
        dy = _round_half_up(ref_y - ay)
        if dx or dy:
            logger.debug("agent_aligned", agent=agent, dx=dx, dy=dy)
        aligned.append(tuple(p.translated(dx, dy) for p in traj))
    return aligned
