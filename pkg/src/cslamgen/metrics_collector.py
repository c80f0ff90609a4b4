"""
Metrics collection for dataset generation: phase timings, edge counts and task counts.
"""

import threading
import time
from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, Optional, Union

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

from .config import MetricsConfig


class GenerationMetrics:
    """
    Collects and manages metrics for generation runs.

    Supports:
    - Wall time per phase (walk, align, odometry, closures, write)
    - Edge counts by kind
    - Counts of agent and agent-pair tasks
    - Optional mirroring into a private Prometheus registry
    """

    def __init__(self, config: Optional[MetricsConfig] = None):
        """
        Initialize metrics collector.

        Args:
            config: Metrics configuration
        """
        self.config = config or MetricsConfig()
        self._lock = threading.RLock()

        self.phase_duration_sum: Dict[str, float] = defaultdict(float)
        self.phase_count: Dict[str, int] = defaultdict(int)
        self.edge_count: Dict[str, int] = defaultdict(int)
        self.task_count: Dict[str, int] = defaultdict(int)

        self.registry: Optional[CollectorRegistry] = None
        if self.config.enable_prometheus:
            self._init_prometheus()

    def _init_prometheus(self) -> None:
        prefix = self.config.metrics_prefix
        self.registry = CollectorRegistry()
        self._phase_histogram = Histogram(
            f"{prefix}_phase_duration_seconds",
            "Wall time of a generation phase",
            ["phase"],
            registry=self.registry,
        )
        self._edge_counter = Counter(
            f"{prefix}_edges",
            "Edges generated by kind",
            ["kind"],
            registry=self.registry,
        )

    def record_phase(self, phase: str, duration: float) -> None:
        """
        Record the wall time of one phase.

        Args:
            phase: Phase name
            duration: Duration in seconds
        """
        with self._lock:
            self.phase_duration_sum[phase] += duration
            self.phase_count[phase] += 1
            if self.registry is not None:
                self._phase_histogram.labels(phase=phase).observe(duration)

    def timed(self, phase: str) -> "_PhaseTimer":
        """Context manager recording the wall time of ``phase``."""
        return _PhaseTimer(self, phase)

    def record_edges(self, kind: str, count: int) -> None:
        with self._lock:
            self.edge_count[kind] += count
            if self.registry is not None:
                self._edge_counter.labels(kind=kind).inc(count)

    def record_tasks(self, kind: str, count: int) -> None:
        with self._lock:
            self.task_count[kind] += count

    def get_metrics(self) -> Dict[str, Any]:
        """
        Get comprehensive metrics summary.

        Returns:
            Dictionary containing all metrics
        """
        with self._lock:
            total = sum(self.phase_duration_sum.values())
            return {
                "timestamp": time.time(),
                "summary": {
                    "total_seconds": round(total, 6),
                    "total_edges": sum(self.edge_count.values()),
                },
                "phases": {
                    phase: {
                        "seconds": round(self.phase_duration_sum[phase], 6),
                        "count": self.phase_count[phase],
                    }
                    for phase in self.phase_duration_sum
                },
                "edges": dict(self.edge_count),
                "tasks": dict(self.task_count),
            }

    def write_prometheus(self, path: Union[str, Path]) -> None:
        """Dump the Prometheus registry in text exposition format."""
        if self.registry is None:
            raise RuntimeError("Prometheus export is disabled in MetricsConfig")
        write_to_textfile(str(path), self.registry)

    def reset(self) -> None:
        """Reset all metrics to zero."""
        with self._lock:
            self.phase_duration_sum.clear()
            self.phase_count.clear()
            self.edge_count.clear()
            self.task_count.clear()
            if self.registry is not None:
                self._init_prometheus()


class _PhaseTimer:
    def __init__(self, metrics: GenerationMetrics, phase: str):
        self.metrics = metrics
        self.phase = phase
        self.start = 0.0

    def __enter__(self) -> "_PhaseTimer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.metrics.record_phase(self.phase, time.perf_counter() - self.start)
