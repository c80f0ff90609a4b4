"""
Performance Benchmark for cslamgen.

Times dataset generation across the three scaling sweeps and checks the
expected trends:
- Steps per agent (linear)
- Number of agents (linear)
- Loop-closure radius (superlinear)
- Thread-pool speedup and memory use at a fixed size
"""

import json
import time
import tracemalloc
from typing import Any, Dict, List

from cslamgen.bench import BenchmarkRunner, linear_fit_r2, successive_ratios
from cslamgen.config import GenerationConfig, SweepParameter
from cslamgen.evaluation import dataset_stats
from cslamgen.generator import DatasetGenerator

STEPS = [2000, 4000, 6000, 8000, 10000]
AGENTS = [1, 2, 4, 8]
RADII = [1, 2, 4, 8]
REPETITIONS = 5


class PerformanceBenchmark:
    """Performance benchmarking suite for cslamgen."""

    def __init__(self, repetitions: int = REPETITIONS):
        """Initialize benchmark suite."""
        self.runner = BenchmarkRunner(max_workers=1)
        self.repetitions = repetitions
        self.results: Dict[str, Any] = {}

    def run_all_benchmarks(self) -> Dict[str, Any]:
        """Run all benchmarking tests."""
        print("Running cslamgen Performance Benchmarks...\n")

        results = {}
        results.update(self.benchmark_steps())
        results.update(self.benchmark_agents())
        results.update(self.benchmark_radius())
        results.update(self.benchmark_threads())
        results.update(self.benchmark_memory_usage())

        self.results = results
        return results

    def _medians(self, param: SweepParameter, values: List[int], base: GenerationConfig) -> List[float]:
        rows = self.runner.sweep(param, values, repetitions=self.repetitions, base=base)
        return [row.median_seconds for row in rows]

    def benchmark_steps(self) -> Dict[str, Any]:
        """Generation time against steps per agent."""
        print("📊 Benchmarking steps per agent...")
        times = self._medians(SweepParameter.STEPS, STEPS, GenerationConfig(n_agents=2))
        r2 = linear_fit_r2(STEPS, times)
        return {
            "steps_sweep": {
                "median_seconds": dict(zip(map(str, STEPS), times)),
                "linear_fit_r2": r2,
                "linear": r2 >= 0.98,
            }
        }

    def benchmark_agents(self) -> Dict[str, Any]:
        """Generation time against the number of agents."""
        print("📊 Benchmarking number of agents...")
        times = self._medians(SweepParameter.AGENTS, AGENTS, GenerationConfig(n_steps=3000))
        r2 = linear_fit_r2(AGENTS, times)
        return {
            "agents_sweep": {
                "median_seconds": dict(zip(map(str, AGENTS), times)),
                "linear_fit_r2": r2,
                "linear": r2 >= 0.98,
            }
        }

    def benchmark_radius(self) -> Dict[str, Any]:
        """Generation time against the loop-closure radius."""
        print("📊 Benchmarking loop-closure radius...")
        times = self._medians(SweepParameter.RADIUS, RADII, GenerationConfig(n_agents=2, n_steps=5000))
        ratios = successive_ratios(times)
        return {
            "radius_sweep": {
                "median_seconds": dict(zip(map(str, RADII), times)),
                "successive_ratios": ratios,
                "superlinear": all(b > a for a, b in zip(ratios, ratios[1:])),
            }
        }

    def benchmark_threads(self) -> Dict[str, Any]:
        """Serial against pooled generation of a mid-sized dataset."""
        print("📊 Benchmarking thread pool...")
        cfg = GenerationConfig(n_agents=8, n_steps=3500, master_seed=3500)
        timings = {}
        for workers in (1, 4):
            start = time.perf_counter()
            with DatasetGenerator(max_workers=workers) as generator:
                generator.generate(cfg)
            timings[workers] = time.perf_counter() - start
        return {
            "thread_pool": {
                "serial_seconds": timings[1],
                "four_workers_seconds": timings[4],
                "speedup_ratio": timings[1] / timings[4],
            }
        }

    def benchmark_memory_usage(self) -> Dict[str, Any]:
        """Peak traced memory while generating a mid-sized dataset."""
        print("📊 Benchmarking memory usage...")
        cfg = GenerationConfig(n_agents=5, n_steps=10000, master_seed=10000)

        tracemalloc.start()
        with DatasetGenerator(max_workers=1) as generator:
            multi = generator.generate(cfg)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()

        stats = dataset_stats(multi)
        return {
            "memory_usage": {
                "peak_memory_kb": peak / 1024,
                "total_constraints": stats.total_constraints,
                "memory_per_constraint_kb": peak / 1024 / stats.total_constraints,
            }
        }

    def print_results(self):
        """Print benchmark results in a readable format."""
        print("\n" + "=" * 60)
        print("📈 CSLAMGEN PERFORMANCE BENCHMARK RESULTS")
        print("=" * 60)

        for category, data in self.results.items():
            print(f"\n🔹 {category.replace('_', ' ').title()}:")
            for metric, value in data.items():
                if isinstance(value, dict):
                    print(f"  📊 {metric.replace('_', ' ').title()}:")
                    for sub_metric, sub_value in value.items():
                        print(f"    • {sub_metric}: {sub_value:.4f}")
                elif isinstance(value, list):
                    print(f"  📊 {metric}: " + ", ".join(f"{v:.2f}" for v in value))
                elif isinstance(value, float):
                    print(f"  📊 {metric}: {value:.4f}")
                else:
                    print(f"  📊 {metric}: {value}")

        print("\n" + "=" * 60)


def main():
    """Run all performance benchmarks."""
    benchmark = PerformanceBenchmark()
    results = benchmark.run_all_benchmarks()
    benchmark.print_results()

    with open("benchmark_results.json", "w") as f:
        json.dump(results, f, indent=2, default=str)

    print("\n📄 Results saved to benchmark_results.json")


if __name__ == "__main__":
    main()
