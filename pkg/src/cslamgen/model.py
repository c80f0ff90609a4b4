"""
Domain value types for pose graphs on a Manhattan grid.

Ground truth lives on an integer grid with headings stored as quarter turns;
measurements, estimates and files use scaled (metric) coordinates.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Quarter-turn count -> unit step on the grid.
_DIRECTIONS = {
    -2: (-1, 0),
    -1: (0, -1),
    0: (1, 0),
    1: (0, 1),
}


def wrap_angle(theta: float) -> float:
    """
    Wrap an angle into the half-open interval [-pi, pi).

    Args:
        theta: Angle in radians

    Returns:
        Equivalent angle in [-pi, pi)

    Raises:
        ValueError: If theta is not finite
    """
    if not math.isfinite(theta):
        raise ValueError(f"Cannot wrap non-finite angle: {theta}")
    if -math.pi <= theta < math.pi:
        return theta
    r = math.fmod(theta + math.pi, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r - math.pi


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    """Vectorized :func:`wrap_angle` for numpy arrays."""
    theta = np.asarray(theta, dtype=float)
    r = np.mod(theta + math.pi, TWO_PI)
    r = np.where(r >= TWO_PI, r - TWO_PI, r)
    in_range = (theta >= -math.pi) & (theta < math.pi)
    return np.where(in_range, theta, r - math.pi)


def wrap_quarter_turns(turns: int) -> int:
    """Wrap an integer quarter-turn count into {-2, -1, 0, 1}."""
    return (turns + 2) % 4 - 2


def quarter_turns_to_radians(turns: int) -> float:
    """Convert a quarter-turn count to radians in [-pi, pi)."""
    return wrap_quarter_turns(turns) * (math.pi / 2.0)


@dataclass(frozen=True)
class ScaledPose:
    """Planar pose in metric units with heading in radians."""

    x: float
    y: float
    heading: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class GridPose:
    """
    Ground-truth pose on the integer grid.

    The heading is an integer quarter-turn count in {-2, -1, 0, 1},
    i.e. one of {-pi, -pi/2, 0, pi/2} radians.
    """

    x: int
    y: int
    heading: int = 0

    def __post_init__(self) -> None:
        if self.heading not in _DIRECTIONS:
            raise ValueError(f"Heading must be a quarter-turn count in {{-2,-1,0,1}}, got {self.heading}")

    @property
    def heading_radians(self) -> float:
        return quarter_turns_to_radians(self.heading)

    @property
    def direction(self) -> Tuple[int, int]:
        """Unit grid step along the current heading."""
        return _DIRECTIONS[self.heading]

    def to_scaled(self, scale: float) -> ScaledPose:
        """Rescale the position by ``scale`` meters per grid unit; heading unchanged."""
        return ScaledPose(self.x * scale, self.y * scale, self.heading_radians)

    def translated(self, dx: int, dy: int) -> "GridPose":
        return GridPose(self.x + dx, self.y + dy, self.heading)


@dataclass(frozen=True)
class InformationMatrix:
    """Symmetric 3x3 information matrix stored as its upper triangle (row-major)."""

    i11: float
    i12: float
    i13: float
    i22: float
    i23: float
    i33: float

    @classmethod
    def diagonal(cls, sigma_pos: float, sigma_ang: float) -> "InformationMatrix":
        """diag(sigma_pos^-2, sigma_pos^-2, sigma_ang^-2)."""
        if sigma_pos <= 0 or sigma_ang <= 0:
            raise ValueError("Standard deviations must be positive for a finite information matrix")
        w_pos = 1.0 / (sigma_pos * sigma_pos)
        w_ang = 1.0 / (sigma_ang * sigma_ang)
        return cls(w_pos, 0.0, 0.0, w_pos, 0.0, w_ang)

    @classmethod
    def identity(cls) -> "InformationMatrix":
        return cls(1.0, 0.0, 0.0, 1.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, matrix: np.ndarray) -> "InformationMatrix":
        """Build from a 3x3 array, symmetrizing by averaging the off-diagonals."""
        m = np.asarray(matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"Expected a 3x3 matrix, got shape {m.shape}")
        m = 0.5 * (m + m.T)
        return cls(*(float(m[r, c]) for r, c in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))))

    @classmethod
    def from_upper_triangle(cls, values: Sequence[float]) -> "InformationMatrix":
        if len(values) != 6:
            raise ValueError(f"Expected 6 upper-triangular entries, got {len(values)}")
        return cls(*(float(v) for v in values))

    def upper_triangle(self) -> Tuple[float, float, float, float, float, float]:
        return (self.i11, self.i12, self.i13, self.i22, self.i23, self.i33)

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                [self.i11, self.i12, self.i13],
                [self.i12, self.i22, self.i23],
                [self.i13, self.i23, self.i33],
            ]
        )

    def is_positive_definite(self) -> bool:
        try:
            np.linalg.cholesky(self.as_array())
        except np.linalg.LinAlgError:
            return False
        return True


@dataclass(frozen=True)
class RelativeMeasurement:
    """Relative pose (dx, dy, dtheta) with an optional information matrix."""

    dx: float
    dy: float
    dtheta: float
    info: Optional[InformationMatrix] = None

    def with_info(self, info: InformationMatrix) -> "RelativeMeasurement":
        return replace(self, info=info)


class EdgeKind(str, Enum):
    """Edge categories within one agent's graph."""
    ODOMETRY = "odometry"
    INTRA_LC = "intra_lc"


@dataclass(frozen=True)
class Edge:
    """Constraint between two nodes of the same agent."""

    from_id: int
    to_id: int
    meas: RelativeMeasurement
    kind: EdgeKind

    def __post_init__(self) -> None:
        if self.from_id < 0 or self.to_id < 0:
            raise ValueError("Node ids must be non-negative")
        if self.kind == EdgeKind.ODOMETRY and self.to_id != self.from_id + 1:
            raise ValueError(f"Odometry edge must join consecutive nodes, got {self.from_id}->{self.to_id}")
        if self.kind == EdgeKind.INTRA_LC and not self.from_id < self.to_id:
            raise ValueError(f"Loop closure must go from the older node, got {self.from_id}->{self.to_id}")


@dataclass(frozen=True)
class InterAgentEdge:
    """Loop closure between node_a of agent_a and node_b of agent_b (agent_a < agent_b)."""

    agent_a: int
    node_a: int
    agent_b: int
    node_b: int
    meas: RelativeMeasurement

    def __post_init__(self) -> None:
        if not 0 <= self.agent_a < self.agent_b:
            raise ValueError(f"Inter-agent edge requires agent_a < agent_b, got {self.agent_a}, {self.agent_b}")
        if self.node_a < 0 or self.node_b < 0:
            raise ValueError("Node ids must be non-negative")

    @property
    def key(self) -> Tuple[int, int, int, int]:
        return (self.agent_a, self.node_a, self.agent_b, self.node_b)


@dataclass(frozen=True)
class AgentGraph:
    """
    One agent's pose graph.

    ``estimates`` are the vertex initial guesses (dead-reckoned odometry in
    scaled units). ``ground_truth`` may be empty for graphs parsed without a
    ground-truth file; otherwise it has one pose per node.
    """

    ground_truth: Tuple[GridPose, ...]
    odometry: Tuple[Edge, ...]
    intra_lc: Tuple[Edge, ...] = ()
    estimates: Tuple[ScaledPose, ...] = ()

    def __post_init__(self) -> None:
        n = self.node_count
        if n == 0:
            raise ValueError("An agent graph needs at least one node")
        if self.ground_truth and self.estimates and len(self.ground_truth) != len(self.estimates):
            raise ValueError("Ground truth and estimates must have one entry per node")
        if len(self.odometry) != n - 1:
            raise ValueError(f"Expected {n - 1} odometry edges for {n} nodes, got {len(self.odometry)}")
        for edge in (*self.odometry, *self.intra_lc):
            if edge.to_id >= n or edge.from_id >= n:
                raise ValueError(f"Edge {edge.from_id}->{edge.to_id} references a node outside 0..{n - 1}")

    @property
    def node_count(self) -> int:
        return max(len(self.ground_truth), len(self.estimates))

    @property
    def edges(self) -> Tuple[Edge, ...]:
        return (*self.odometry, *self.intra_lc)


@dataclass(frozen=True)
class MultiGraph:
    """All agents' graphs plus inter-agent loop closures; ``scale`` is meters per grid unit."""

    agents: Tuple[AgentGraph, ...]
    inter_lc: Tuple[InterAgentEdge, ...] = ()
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("Scale must be positive")
        n_agents = len(self.agents)
        for edge in self.inter_lc:
            if edge.agent_b >= n_agents:
                raise ValueError(f"Inter-agent edge references agent {edge.agent_b} of {n_agents}")
            if edge.node_a >= self.agents[edge.agent_a].node_count:
                raise ValueError(f"Inter-agent edge references node {edge.node_a} of agent {edge.agent_a}")
            if edge.node_b >= self.agents[edge.agent_b].node_count:
                raise ValueError(f"Inter-agent edge references node {edge.node_b} of agent {edge.agent_b}")

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def offsets(self) -> Tuple[int, ...]:
        """Global id of node 0 of each agent when all graphs are concatenated."""
        result = []
        total = 0
        for agent in self.agents:
            result.append(total)
            total += agent.node_count
        return tuple(result)

    def scaled_ground_truth(self, agent: int) -> Tuple[ScaledPose, ...]:
        return tuple(p.to_scaled(self.scale) for p in self.agents[agent].ground_truth)


def compose(pose: ScaledPose, meas: RelativeMeasurement) -> ScaledPose:
    """Apply a relative measurement expressed in the frame of ``pose`` (SE(2) composition)."""
    c = math.cos(pose.heading)
    s = math.sin(pose.heading)
    return ScaledPose(
        pose.x + c * meas.dx - s * meas.dy,
        pose.y + s * meas.dx + c * meas.dy,
        wrap_angle(pose.heading + meas.dtheta),
    )


def positions(poses: Iterable[ScaledPose]) -> np.ndarray:
    """Stack pose positions into an (N, 2) array."""
    return np.array([[p.x, p.y] for p in poses], dtype=float).reshape(-1, 2)
