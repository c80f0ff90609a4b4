"""
cslamgen - Seeded generator for collaborative-SLAM pose-graph datasets
on a Manhattan grid, with multi-g2o I/O, an odometry baseline evaluator
and a scaling benchmark harness.
"""

from .config import GenerationConfig, InfoMode, LoopClosureParams, OdomNoiseParams, validate_config
from .evaluation import agent_ape, dataset_stats, dead_reckon, mean_ape_translation
from .exceptions import (
    ConfigurationError,
    CSLAMGenError,
    DatasetIOError,
    LayoutError,
    MissingFileError,
    ParseError,
)
from .fileio import (
    load_config,
    parse_multig2o,
    save_config,
    write_agent_g2o,
    write_concatenated_g2o,
    write_multig2o,
    write_tum,
)
from .generator import DatasetGenerator, generate
from .model import AgentGraph, GridPose, InformationMatrix, MultiGraph, RelativeMeasurement, ScaledPose, wrap_angle

__version__ = "0.1.0"

__all__ = [
    "AgentGraph",
    "ConfigurationError",
    "CSLAMGenError",
    "DatasetGenerator",
    "DatasetIOError",
    "GenerationConfig",
    "GridPose",
    "InfoMode",
    "InformationMatrix",
    "LayoutError",
    "LoopClosureParams",
    "MissingFileError",
    "MultiGraph",
    "OdomNoiseParams",
    "ParseError",
    "RelativeMeasurement",
    "ScaledPose",
    "agent_ape",
    "dataset_stats",
    "dead_reckon",
    "generate",
    "load_config",
    "mean_ape_translation",
    "parse_multig2o",
    "save_config",
    "validate_config",
    "wrap_angle",
    "write_agent_g2o",
    "write_concatenated_g2o",
    "write_multig2o",
    "write_tum",
    "__version__",
]
