"""
Command-line entry point: ``cslamgen generate | stats | bench``.
"""

import argparse
import json
import sys
import time
from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .bench import BenchmarkRunner, write_csv
from .config import (
    GenerationConfig,
    InfoMode,
    LoggingConfig,
    MetricsConfig,
    OutputFormat,
    SweepParameter,
)
from .evaluation import agent_ape, dataset_stats
from .exceptions import ConfigurationError, CSLAMGenError, DatasetIOError, ParseError
from .fileio import config_from_dict, load_config, parse_multig2o, write_concatenated_g2o, write_multig2o
from .generator import DatasetGenerator
from .logging_setup import configure_logging, get_logger

logger = get_logger(__name__)

CONCATENATED_FILE = "concatenated.g2o"


class ExitCode(IntEnum):
    OK = 0
    UNEXPECTED = 1
    CONFIG_ERROR = 2
    IO_ERROR = 3
    PARSE_ERROR = 4


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _number_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cslamgen",
        description="Generate, inspect and benchmark collaborative pose-graph datasets.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR (env CSLAMGEN_LOG_LEVEL)")
    parser.add_argument("--log-json", action="store_true", help="Render log events as JSON lines")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="Generate a dataset from a JSON config")
    gen.add_argument("--config", type=Path, default=None, help="JSON config; defaults apply when omitted")
    gen.add_argument("--out", type=Path, required=True, help="Output directory (or .g2o file for single_g2o)")
    gen.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.MULTIG2O.value,
    )
    gen.add_argument("--info-mode", choices=[m.value for m in InfoMode], default=None)
    gen.add_argument("--seed", type=int, default=None, help="Overrides master_seed from the config")
    gen.add_argument("--threads", type=_positive_int, default=None, help="Worker threads (env CSLAMGEN_THREADS)")
    gen.add_argument("--overwrite", action="store_true", help="Replace an existing dataset")
    gen.add_argument("--save-config", action="store_true", help="Store the effective config as config.json")
    gen.add_argument("--metrics-file", type=Path, default=None, help="Write Prometheus text metrics here")

    stats = sub.add_parser("stats", help="Counts and odometry APE of a multi-g2o dataset")
    stats.add_argument("dataset", type=Path)

    bench = sub.add_parser("bench", help="Time generation across a parameter sweep (CSV on stdout)")
    bench.add_argument("--sweep", choices=[p.value for p in SweepParameter], required=True)
    bench.add_argument("--values", type=_number_list, required=True, help="Comma-separated sweep points")
    bench.add_argument("--repetitions", type=_positive_int, default=3)
    bench.add_argument("--config", type=Path, default=None, help="Base JSON config")
    bench.add_argument("--agents", type=_positive_int, default=None, help="Base number of agents")
    bench.add_argument("--steps", type=_positive_int, default=None, help="Base number of steps")
    bench.add_argument("--radius", type=float, default=None, help="Base loop-closure radius")
    bench.add_argument("--threads", type=_positive_int, default=1)
    bench.add_argument("--include-io", action="store_true", help="Include writing the multi-g2o tree")
    return parser


def _effective_config(path: Optional[Path], overrides: Dict[str, Any]) -> GenerationConfig:
    cfg = load_config(path) if path is not None else GenerationConfig()
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return cfg
    return config_from_dict({**cfg.model_dump(mode="json"), **overrides}, source="command line")


def _emit(summary: Dict[str, Any], lines: Sequence[str]) -> None:
    print(json.dumps(summary, sort_keys=True))
    for line in lines:
        print(line)


def cmd_generate(args: argparse.Namespace) -> int:
    cfg = _effective_config(args.config, {"master_seed": args.seed, "info_mode": args.info_mode})
    fmt = OutputFormat(args.format)
    metrics_config = MetricsConfig(enable_prometheus=args.metrics_file is not None)

    start = time.perf_counter()
    with DatasetGenerator(max_workers=args.threads, metrics_config=metrics_config) as generator:
        multi = generator.generate(cfg)
        with generator.metrics.timed("write"):
            if fmt in (OutputFormat.MULTIG2O, OutputFormat.BOTH):
                write_multig2o(
                    multi,
                    args.out,
                    overwrite=args.overwrite,
                    config=cfg if args.save_config else None,
                    max_workers=generator.max_workers,
                )
            if fmt == OutputFormat.SINGLE_G2O:
                target = args.out
                if target.exists() and not args.overwrite:
                    raise DatasetIOError("Target file exists; pass --overwrite to replace it", path=target)
                if target.parent != Path(""):
                    target.parent.mkdir(parents=True, exist_ok=True)
                write_concatenated_g2o(multi, target)
            elif fmt == OutputFormat.BOTH:
                write_concatenated_g2o(multi, args.out / CONCATENATED_FILE)
        if args.metrics_file is not None:
            generator.metrics.write_prometheus(args.metrics_file)
    elapsed = time.perf_counter() - start

    stats = dataset_stats(multi)
    summary = {
        "command": "generate",
        "seed": cfg.master_seed,
        "format": fmt.value,
        "info_mode": cfg.info_mode.value,
        "out": str(args.out),
        "seconds": round(elapsed, 6),
        **stats.model_dump(exclude={"nodes_per_agent"}),
    }
    _emit(
        summary,
        [
            f"Wrote {fmt.value} dataset to {args.out} (seed {cfg.master_seed}) in {elapsed:.3f} s",
            f"  agents: {stats.n_agents}, odometry edges: {stats.odometry_edges}",
            f"  loop closures: {stats.intra_lc_count} intra-agent, {stats.inter_lc_count} inter-agent",
            f"  total constraints: {stats.total_constraints}",
        ],
    )
    return ExitCode.OK


def cmd_stats(args: argparse.Namespace) -> int:
    multi = parse_multig2o(args.dataset)
    stats = dataset_stats(multi)
    ape = agent_ape(multi)
    summary = {
        "command": "stats",
        "dataset": str(args.dataset),
        **stats.model_dump(),
        "ape_available": ape.available,
        "ape_pooled": ape.pooled,
        "ape_per_agent": {str(k + 1): v for k, v in ape.per_agent.items()},
    }
    lines = [
        f"Dataset {args.dataset}: {stats.n_agents} agents, nodes per agent {stats.nodes_per_agent}",
        f"  odometry edges: {stats.odometry_edges}",
        f"  loop closures: {stats.intra_lc_count} intra-agent, {stats.inter_lc_count} inter-agent",
        f"  total constraints: {stats.total_constraints}",
    ]
    if ape.available:
        lines.append(f"  odometry APE (unaligned, translation): {ape.pooled:.6f} m pooled")
        lines.extend(f"    agent{k + 1}: {v:.6f} m" for k, v in ape.per_agent.items())
    else:
        lines.append("  odometry APE: unavailable (missing ground truth)")
    _emit(summary, lines)
    return ExitCode.OK


def cmd_bench(args: argparse.Namespace) -> int:
    base = _effective_config(args.config, {"n_agents": args.agents, "n_steps": args.steps})
    if args.radius is not None:
        base = config_from_dict(
            {
                **base.model_dump(mode="json"),
                "intra_lc": {**base.intra_lc.model_dump(), "radius": args.radius},
                "inter_lc": {**base.inter_lc.model_dump(), "radius": args.radius},
            },
            source="command line",
        )
    runner = BenchmarkRunner(max_workers=args.threads, include_io=args.include_io)
    rows = runner.sweep(SweepParameter(args.sweep), args.values, repetitions=args.repetitions, base=base)
    write_csv(rows, sys.stdout)
    return ExitCode.OK


_COMMANDS = {"generate": cmd_generate, "stats": cmd_stats, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        level_override = {"level": args.log_level} if args.log_level else {}
        configure_logging(LoggingConfig(json_logs=args.log_json, **level_override))
    except ValueError as exc:
        print(f"cslamgen: error: {exc}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR

    try:
        return int(_COMMANDS[args.command](args))
    except ConfigurationError as exc:
        print(f"cslamgen: configuration error: {exc}", file=sys.stderr)
        return ExitCode.CONFIG_ERROR
    except ParseError as exc:
        print(f"cslamgen: parse error: {exc}", file=sys.stderr)
        return ExitCode.PARSE_ERROR
    except DatasetIOError as exc:
        print(f"cslamgen: I/O error: {exc}", file=sys.stderr)
        return ExitCode.IO_ERROR
    except OSError as exc:
        print(f"cslamgen: I/O error: {exc}", file=sys.stderr)
        return ExitCode.IO_ERROR
    except CSLAMGenError as exc:
        logger.error("generation_failed", error=str(exc))
        print(f"cslamgen: error: {exc}", file=sys.stderr)
        return ExitCode.UNEXPECTED
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected_error")
        print(f"cslamgen: unexpected error: {exc}", file=sys.stderr)
        return ExitCode.UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
