"""
Dataset generator: random walks, alignment, odometry and loop closures.
"""

from concurrent.futures import Executor, ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .closure import generate_all
from .config import GenerationConfig, MetricsConfig, OdomNoiseParams, default_thread_count
from .evaluation import dead_reckon
from .logging_setup import get_logger
from .metrics_collector import GenerationMetrics
from .model import (
    AgentGraph,
    Edge,
    EdgeKind,
    GridPose,
    InformationMatrix,
    MultiGraph,
    quarter_turns_to_radians,
    wrap_quarter_turns,
)
from .noise import odom_information, odometry_measurements
from .rng import ODOMETRY, WALK, derive_stream
from .walk import Trajectory, align, generate_trajectory

logger = get_logger(__name__)


class DatasetGenerator:
    """
    Generates collaborative pose-graph datasets from a GenerationConfig.

    Per-agent and per-pair work may run on a thread pool; every task draws
    from its own derived stream, so the output is identical for any worker
    count.
    """

    def __init__(
        self,
        max_workers: Optional[int] = None,
        metrics_config: Optional[MetricsConfig] = None,
    ):
        """
        Initialize the generator.

        Args:
            max_workers: Worker threads; 1 runs serially, None reads CSLAMGEN_THREADS
            metrics_config: Configuration for metrics collection
        """
        self.max_workers = max_workers if max_workers is not None else default_thread_count()
        self.metrics = GenerationMetrics(metrics_config)
        self._executor: Optional[Executor] = None
        if self.max_workers is None or self.max_workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.max_workers, thread_name_prefix="cslamgen")

    def _map(self, fn: Any, items: Sequence[Any]) -> List[Any]:
        if self._executor is None:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))

    def trajectories(self, cfg: GenerationConfig) -> List[Trajectory]:
        """Ground-truth walks of all agents, aligned when ``cfg.align`` is set."""
        with self.metrics.timed("walk"):
            trajs = self._map(
                lambda agent: generate_trajectory(agent, cfg, derive_stream(cfg.master_seed, WALK, agent)),
                list(range(cfg.n_agents)),
            )
        if cfg.align and cfg.n_agents > 1:
            with self.metrics.timed("align"):
                trajs = align(trajs)
        return trajs

    def _odometry_info(self, cfg: GenerationConfig) -> Dict[int, InformationMatrix]:
        """Information matrix for each possible heading change (in quarter turns)."""
        floor = cfg.info_sigma_floor
        params = OdomNoiseParams(
            sigma_pos=max(cfg.odom_sigma_pos, floor),
            sigma_ang=max(cfg.odom_sigma_ang, floor),
        )
        return {
            turn: odom_information(cfg.info_mode, quarter_turns_to_radians(turn), cfg.scale, params)
            for turn in range(-2, 2)
        }

    def agent_graph(
        self,
        agent: int,
        traj: Sequence[GridPose],
        cfg: GenerationConfig,
        info: Dict[int, InformationMatrix],
    ) -> AgentGraph:
        """Odometry edges and dead-reckoned vertex estimates for one trajectory."""
        scaled = [pose.to_scaled(cfg.scale) for pose in traj]
        meas = odometry_measurements(scaled, cfg.odom_noise, derive_stream(cfg.master_seed, ODOMETRY, agent))
        edges = []
        for k, m in enumerate(meas, start=1):
            turn = wrap_quarter_turns(traj[k].heading - traj[k - 1].heading)
            edges.append(Edge(k - 1, k, m.with_info(info[turn]), EdgeKind.ODOMETRY))
        return AgentGraph(
            ground_truth=tuple(traj),
            odometry=tuple(edges),
            estimates=tuple(dead_reckon(meas, scaled[0])),
        )

    def generate(self, cfg: GenerationConfig) -> MultiGraph:
        """
        Generate a complete dataset.

        Args:
            cfg: Generation configuration

        Returns:
            MultiGraph with odometry, intra- and inter-agent loop closures
        """
        log = logger.bind(n_agents=cfg.n_agents, n_steps=cfg.n_steps, seed=cfg.master_seed)
        trajs = self.trajectories(cfg)
        log.info("trajectories_generated")

        with self.metrics.timed("odometry"):
            info = self._odometry_info(cfg)
            agents: Tuple[AgentGraph, ...] = tuple(
                self._map(lambda a: self.agent_graph(a, trajs[a], cfg, info), list(range(cfg.n_agents)))
            )
        multi = MultiGraph(agents=agents, scale=cfg.scale)

        with self.metrics.timed("closures"):
            multi = generate_all(multi, cfg, self._executor)

        self.metrics.record_tasks("agents", cfg.n_agents)
        self.metrics.record_tasks("pairs", cfg.n_agents * (cfg.n_agents - 1) // 2)
        self.metrics.record_edges(EdgeKind.ODOMETRY.value, sum(len(a.odometry) for a in multi.agents))
        self.metrics.record_edges(EdgeKind.INTRA_LC.value, sum(len(a.intra_lc) for a in multi.agents))
        self.metrics.record_edges("inter_lc", len(multi.inter_lc))
        log.info("dataset_generated", inter_lc=len(multi.inter_lc))
        return multi

    def get_metrics(self) -> Dict[str, Any]:
        """
        Get current metrics for the generator.

        Returns:
            Dictionary containing metrics data
        """
        return self.metrics.get_metrics()

    def close(self) -> None:
        """Shut down the worker pool."""
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "DatasetGenerator":
        """Context manager entry."""
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Context manager exit."""
        self.close()


def generate(cfg: GenerationConfig, max_workers: Optional[int] = 1) -> MultiGraph:
    """Convenience wrapper: generate a dataset with a throwaway generator."""
    with DatasetGenerator(max_workers=max_workers) as generator:
        return generator.generate(cfg)
