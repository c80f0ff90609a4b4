"""
Intra- and inter-agent loop closures by proximity search and Bernoulli acceptance.
"""

import math
from collections import defaultdict
from concurrent.futures import Executor
from dataclasses import replace
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, Generic, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .config import GenerationConfig, LoopClosureParams
from .logging_setup import get_logger
from .model import (
    AgentGraph,
    Edge,
    EdgeKind,
    GridPose,
    InformationMatrix,
    InterAgentEdge,
    MultiGraph,
    ScaledPose,
)
from .noise import lc_information, lc_measurements
from .rng import INTER_LC, INTER_LC_NOISE, INTRA_LC, INTRA_LC_NOISE, RngStream, derive_stream

logger = get_logger(__name__)

T = TypeVar("T")
Cell = Tuple[int, int]


@lru_cache(maxsize=64)
def _cell_offsets(radius: float) -> Tuple[Tuple[int, int, float], ...]:
    """Cell offsets within ``radius`` of the origin, with their distances."""
    reach = int(math.ceil(radius))
    limit = radius * radius
    offsets = []
    for dx in range(-reach, reach + 1):
        for dy in range(-reach, reach + 1):
            d2 = dx * dx + dy * dy
            if d2 <= limit:
                offsets.append((dx, dy, math.sqrt(d2)))
    return tuple(offsets)


class SpatialIndex(Generic[T]):
    """
    Map from occupied integer grid cells to the items sitting on them.

    A query visits the (2*ceil(R)+1)^2 neighbourhood of the center and keeps
    the cells whose Euclidean distance is at most R.
    """

    def __init__(self) -> None:
        self._cells: Dict[Cell, List[T]] = defaultdict(list)
        self._size = 0

    @classmethod
    def from_poses(cls, poses: Sequence[GridPose], keys: Optional[Sequence[T]] = None) -> "SpatialIndex[T]":
        index: "SpatialIndex[T]" = cls()
        items: Iterable = keys if keys is not None else range(len(poses))
        for pose, item in zip(poses, items):
            index.insert((pose.x, pose.y), item)
        return index

    def insert(self, cell: Cell, item: T) -> None:
        self._cells[cell].append(item)
        self._size += 1

    def query(self, center: Cell, radius: float) -> List[Tuple[T, float]]:
        """All (item, distance) pairs within ``radius`` of ``center``, in cell-scan order."""
        if radius < 0:
            raise ValueError("Query radius must be non-negative")
        cx, cy = center
        found: List[Tuple[T, float]] = []
        for dx, dy, dist in _cell_offsets(float(radius)):
            items = self._cells.get((cx + dx, cy + dy))
            if items:
                found.extend((item, dist) for item in items)
        return found

    def cells(self) -> Dict[Cell, List[T]]:
        return dict(self._cells)

    def __len__(self) -> int:
        return self._size


def accept_probability(dist: float, p: LoopClosureParams) -> float:
    """
    Probability of creating a loop closure between poses ``dist`` grid units apart.

    p_lc at zero distance, p_lc * exp(-gain * (dist / R)^2) inside the radius,
    zero outside it (and for any positive distance when R is zero).
    """
    if dist < 0:
        raise ValueError(f"Distance must be non-negative, got {dist}")
    if dist == 0:
        return p.prob_at_zero
    if p.radius == 0 or dist > p.radius:
        return 0.0
    return p.prob_at_zero * math.exp(-p.decay_gain * (dist / p.radius) ** 2)


def _accept(dists: Sequence[float], p: LoopClosureParams, rng: RngStream) -> np.ndarray:
    """One uniform draw per candidate, in candidate order."""
    probs = np.array([accept_probability(d, p) for d in dists], dtype=float)
    draws = rng.random(len(probs))
    return draws < probs


def _scaled(poses: Sequence[GridPose], scale: float) -> List[ScaledPose]:
    return [p.to_scaled(scale) for p in poses]


def intra_lc(
    agent: AgentGraph,
    p: LoopClosureParams,
    rng: RngStream,
    *,
    scale: float = 1.0,
    noise_rng: Optional[RngStream] = None,
    info: Optional[InformationMatrix] = None,
) -> Tuple[Edge, ...]:
    """
    Loop closures within one agent.

    Every pair (i, k) with i < k and the poses at most R apart is trialled
    once, in ascending (k, i) order. Accepted pairs become edges i -> k
    measured in the frame of node i.

    Args:
        agent: Graph with ground truth on the grid
        p: Intra-agent loop-closure parameters
        rng: Acceptance stream
        scale: Meters per grid unit for the measurements
        noise_rng: Measurement-noise stream (defaults to ``rng``)
        info: Information matrix to attach (defaults to :func:`lc_information`)
    """
    gt = agent.ground_truth
    index: SpatialIndex[int] = SpatialIndex()
    candidates: List[Tuple[int, int]] = []
    dists: List[float] = []
    for k, pose in enumerate(gt):
        if k > 0:
            for i, dist in sorted(index.query((pose.x, pose.y), p.radius)):
                candidates.append((i, k))
                dists.append(dist)
        index.insert((pose.x, pose.y), k)

    accepted = [c for c, ok in zip(candidates, _accept(dists, p, rng)) if ok]
    if not accepted:
        return ()
    scaled = _scaled(gt, scale)
    meas = lc_measurements([(scaled[k], scaled[i]) for i, k in accepted], p, noise_rng or rng)
    info = info or lc_information(p)
    return tuple(
        Edge(i, k, m.with_info(info), EdgeKind.INTRA_LC) for (i, k), m in zip(accepted, meas)
    )


def inter_lc(
    a: AgentGraph,
    b: AgentGraph,
    agent_ids: Tuple[int, int],
    p: LoopClosureParams,
    rng: RngStream,
    *,
    scale: float = 1.0,
    noise_rng: Optional[RngStream] = None,
    info: Optional[InformationMatrix] = None,
) -> Tuple[InterAgentEdge, ...]:
    """
    Loop closures between two agents.

    Every cross-agent pose pair at most R apart is trialled once, in ascending
    (node of a, node of b) order; measurements are expressed in the frame of
    the pose of ``a`` (the lower-indexed agent).
    """
    id_a, id_b = agent_ids
    if not id_a < id_b:
        raise ValueError(f"Agent ids must be ordered, got {agent_ids}")
    index: SpatialIndex[int] = SpatialIndex.from_poses(b.ground_truth)
    candidates: List[Tuple[int, int]] = []
    dists: List[float] = []
    for node_a, pose in enumerate(a.ground_truth):
        for node_b, dist in sorted(index.query((pose.x, pose.y), p.radius)):
            candidates.append((node_a, node_b))
            dists.append(dist)

    accepted = [c for c, ok in zip(candidates, _accept(dists, p, rng)) if ok]
    if not accepted:
        return ()
    scaled_a = _scaled(a.ground_truth, scale)
    scaled_b = _scaled(b.ground_truth, scale)
    meas = lc_measurements([(scaled_b[nb], scaled_a[na]) for na, nb in accepted], p, noise_rng or rng)
    info = info or lc_information(p)
    return tuple(
        InterAgentEdge(id_a, na, id_b, nb, m.with_info(info)) for (na, nb), m in zip(accepted, meas)
    )


def information_params(p: LoopClosureParams, sigma_floor: float) -> LoopClosureParams:
    """Copy of ``p`` whose sigmas are at least ``sigma_floor`` (for building information only)."""
    return p.model_copy(
        update={"sigma_pos": max(p.sigma_pos, sigma_floor), "sigma_ang": max(p.sigma_ang, sigma_floor)}
    )


def _run(executor: Optional[Executor], fn: Callable[[T], object], items: Sequence[T]) -> list:
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


def generate_all(multi: MultiGraph, cfg: GenerationConfig, executor: Optional[Executor] = None) -> MultiGraph:
    """
    Populate intra-agent closures per agent and inter-agent closures per agent pair.

    Each agent and each pair uses its own derived streams, so the result does
    not depend on whether or how the tasks run concurrently.
    """
    seed = cfg.master_seed
    intra_info = lc_information(information_params(cfg.intra_lc, cfg.info_sigma_floor))
    inter_info = lc_information(information_params(cfg.inter_lc, cfg.info_sigma_floor))

    def intra_task(agent: int) -> Tuple[Edge, ...]:
        return intra_lc(
            multi.agents[agent],
            cfg.intra_lc,
            derive_stream(seed, INTRA_LC, agent),
            scale=multi.scale,
            noise_rng=derive_stream(seed, INTRA_LC_NOISE, agent),
            info=intra_info,
        )

    def inter_task(pair: Tuple[int, int]) -> Tuple[InterAgentEdge, ...]:
        ia, ib = pair
        return inter_lc(
            multi.agents[ia],
            multi.agents[ib],
            pair,
            cfg.inter_lc,
            derive_stream(seed, INTER_LC, ia, ib),
            scale=multi.scale,
            noise_rng=derive_stream(seed, INTER_LC_NOISE, ia, ib),
            info=inter_info,
        )

    pairs = list(combinations(range(multi.n_agents), 2))
    intra = _run(executor, intra_task, list(range(multi.n_agents)))
    inter = _run(executor, inter_task, pairs)

    agents = tuple(replace(graph, intra_lc=edges) for graph, edges in zip(multi.agents, intra))
    inter_edges = tuple(edge for edges in inter for edge in edges)
    logger.info(
        "closures_generated",
        intra=sum(len(e) for e in intra),
        inter=len(inter_edges),
        pairs=len(pairs),
    )
    return MultiGraph(agents=agents, inter_lc=inter_edges, scale=multi.scale)
