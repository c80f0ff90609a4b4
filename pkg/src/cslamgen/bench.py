"""
Scaling benchmarks: wall time of dataset generation across parameter sweeps.
"""

import csv
import statistics
import sys
import tempfile
import time
from typing import IO, Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from .config import GenerationConfig, SweepParameter
from .fileio import write_multig2o
from .generator import DatasetGenerator
from .logging_setup import get_logger

logger = get_logger(__name__)

CSV_HEADER = ("parameter", "value", "median_seconds", "min_seconds", "max_seconds", "repetitions")


class BenchRow(NamedTuple):
    parameter: str
    value: float
    median_seconds: float
    min_seconds: float
    max_seconds: float
    repetitions: int


def config_for(base: GenerationConfig, param: SweepParameter, value: float) -> GenerationConfig:
    """Copy of ``base`` with the swept parameter set to ``value``."""
    if param == SweepParameter.AGENTS:
        update = {"n_agents": int(value), "initial_poses": None, "n_steps_per_agent": None,
                  "steps_between_turns_per_agent": None}
    elif param == SweepParameter.STEPS:
        update = {"n_steps": int(value), "n_steps_per_agent": None}
    else:
        update = {
            "intra_lc": base.intra_lc.model_copy(update={"radius": float(value)}),
            "inter_lc": base.inter_lc.model_copy(update={"radius": float(value)}),
        }
    return GenerationConfig.model_validate({**base.model_dump(), **update})


class BenchmarkRunner:
    """
    Times generation over a sweep of one parameter.

    File I/O is excluded unless ``include_io`` is set, in which case each
    repetition also writes a multi-g2o tree into a scratch directory.
    """

    def __init__(self, max_workers: Optional[int] = 1, include_io: bool = False):
        self.max_workers = max_workers
        self.include_io = include_io

    def time_once(self, cfg: GenerationConfig) -> float:
        with DatasetGenerator(max_workers=self.max_workers) as generator:
            start = time.perf_counter()
            multi = generator.generate(cfg)
            if self.include_io:
                with tempfile.TemporaryDirectory(prefix="cslamgen-bench-") as scratch:
                    write_multig2o(multi, scratch, overwrite=True)
            return time.perf_counter() - start

    def sweep(
        self,
        param: SweepParameter,
        values: Sequence[float],
        repetitions: int = 3,
        base: Optional[GenerationConfig] = None,
    ) -> List[BenchRow]:
        """
        Run ``repetitions`` generations per sweep value.

        Args:
            param: Swept parameter
            values: Sweep points, in the order they are reported
            repetitions: Runs per point; the median is reported
            base: Configuration for everything not swept

        Returns:
            One row per sweep value
        """
        if repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        base = base or GenerationConfig()
        rows = []
        for value in values:
            cfg = config_for(base, param, value)
            times = [self.time_once(cfg) for _ in range(repetitions)]
            row = BenchRow(param.value, value, statistics.median(times), min(times), max(times), repetitions)
            logger.info("bench_point", parameter=param.value, value=value, median_seconds=row.median_seconds)
            rows.append(row)
        return rows


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Coefficient of determination of a least-squares line through (xs, ys)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2 or x.size != y.size:
        raise ValueError("Need at least two points of equal-length coordinates")
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        return 1.0
    return 1.0 - float(np.sum(residual**2)) / total


def successive_ratios(ys: Sequence[float]) -> List[float]:
    """``ys[i+1] / ys[i]`` for consecutive entries."""
    return [b / a for a, b in zip(ys[:-1], ys[1:])]


def write_csv(rows: Iterable[BenchRow], stream: Optional[IO[str]] = None) -> None:
    """Write rows as CSV with a header line (stdout by default)."""
    writer = csv.writer(stream or sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            (row.parameter, row.value, f"{row.median_seconds:.6f}", f"{row.min_seconds:.6f}",
             f"{row.max_seconds:.6f}", row.repetitions)
        )
