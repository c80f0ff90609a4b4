"""
Configuration models for cslamgen using Pydantic for validation and type safety.
"""

import os
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictBool,
    StrictInt,
    ValidationError,
    field_validator,
    model_validator,
)

from .model import GridPose

DEFAULT_MASTER_SEED = 0
DEFAULT_SIGMA = 0.023
MAX_SEED = 2**64 - 1

THREADS_ENV_VAR = "CSLAMGEN_THREADS"
LOG_LEVEL_ENV_VAR = "CSLAMGEN_LOG_LEVEL"


class InfoMode(str, Enum):
    """How odometry information matrices are built."""
    EXACT = "exact"
    DIAGONAL = "diagonal"


class OutputFormat(str, Enum):
    """Dataset layouts the CLI can write."""
    MULTIG2O = "multig2o"
    SINGLE_G2O = "single_g2o"
    BOTH = "both"


class SweepParameter(str, Enum):
    """Parameters the benchmark harness can sweep."""
    AGENTS = "agents"
    STEPS = "steps"
    RADIUS = "radius"


class _FrozenModel(BaseModel):
    # finite floats only; int and bool fields are strict, so JSON true or "yes" is a type mismatch
    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)


class InitialPose(_FrozenModel):
    """Initial grid pose of one agent."""

    x: StrictInt = Field(default=0, description="Grid x coordinate")
    y: StrictInt = Field(default=0, description="Grid y coordinate")
    heading: StrictInt = Field(default=0, ge=-2, le=1, description="Heading as quarter turns in {-2,-1,0,1}")

    def to_grid_pose(self) -> GridPose:
        return GridPose(self.x, self.y, self.heading)


class OdomNoiseParams(_FrozenModel):
    """Standard deviations of the odometry distance and heading-change noise."""

    sigma_pos: float = Field(default=DEFAULT_SIGMA, ge=0, description="Distance noise std, meters")
    sigma_ang: float = Field(default=DEFAULT_SIGMA, ge=0, description="Heading noise std, radians")


class LoopClosureParams(_FrozenModel):
    """Acceptance and noise parameters for one family of loop closures."""

    prob_at_zero: float = Field(default=0.3, ge=0, le=1, description="Acceptance probability at zero distance")
    radius: float = Field(default=1.0, ge=0, description="Search radius in grid units")
    sigma_pos: float = Field(default=DEFAULT_SIGMA, ge=0, description="Position noise std, meters")
    sigma_ang: float = Field(default=DEFAULT_SIGMA, ge=0, description="Heading noise std, radians")
    decay_gain: float = Field(default=5.0, gt=0, description="Gain of the Gaussian acceptance decay")


class GenerationConfig(_FrozenModel):
    """Every user-tunable parameter of a dataset."""

    n_agents: StrictInt = Field(default=2, ge=1, description="Number of agents")
    n_steps: StrictInt = Field(default=500, ge=1, description="Random-walk steps per agent")
    steps_between_turns: StrictInt = Field(default=4, ge=1, description="Turning is possible every s-th step")
    allow_reverse: StrictBool = Field(default=False, description="Allow 180 degree turns")
    block_length: Optional[float] = Field(
        default=None,
        gt=0,
        description="Length d of s grid steps in meters; None means d = s (one meter per step)",
    )
    initial_poses: Optional[List[InitialPose]] = Field(default=None, description="Per-agent initial poses")
    odom_sigma_pos: float = Field(default=DEFAULT_SIGMA, ge=0, description="Odometry distance noise std")
    odom_sigma_ang: float = Field(default=DEFAULT_SIGMA, ge=0, description="Odometry heading noise std")
    intra_lc: LoopClosureParams = Field(default_factory=LoopClosureParams)
    inter_lc: LoopClosureParams = Field(default_factory=LoopClosureParams)
    align: StrictBool = Field(default=True, description="Translate agents so their anchorpoints coincide")
    info_mode: InfoMode = Field(default=InfoMode.EXACT, description="Odometry information matrix mode")
    master_seed: StrictInt = Field(default=DEFAULT_MASTER_SEED, ge=0, le=MAX_SEED, description="Root seed")
    n_steps_per_agent: Optional[List[StrictInt]] = Field(default=None, description="Per-agent override of n_steps")
    steps_between_turns_per_agent: Optional[List[StrictInt]] = Field(
        default=None, description="Per-agent override of steps_between_turns"
    )
    info_sigma_floor: float = Field(
        default=1e-3, gt=0, description="Stand-in for a zero sigma when building information matrices"
    )

    @field_validator("n_steps_per_agent")
    @classmethod
    def validate_steps_per_agent(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and any(n < 0 for n in v):
            raise ValueError("per-agent step counts must be >= 0")
        return v

    @field_validator("steps_between_turns_per_agent")
    @classmethod
    def validate_turns_per_agent(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and any(s < 1 for s in v):
            raise ValueError("per-agent steps_between_turns must be >= 1")
        return v

    @model_validator(mode="after")
    def validate_per_agent_lengths(self) -> "GenerationConfig":
        for name in ("initial_poses", "n_steps_per_agent", "steps_between_turns_per_agent"):
            value = getattr(self, name)
            if value is not None and len(value) != self.n_agents:
                raise ValueError(f"{name} has {len(value)} entries for {self.n_agents} agents")
        return self

    @property
    def n_d(self) -> int:
        """0 allows the 180 degree turn (Theta in {-2..1}), 1 excludes it (Theta in {-1..1})."""
        return 0 if self.allow_reverse else 1

    @property
    def scale(self) -> float:
        """Meters per grid unit, d / s."""
        if self.block_length is None:
            return 1.0
        return self.block_length / self.steps_between_turns

    @property
    def odom_noise(self) -> OdomNoiseParams:
        return OdomNoiseParams(sigma_pos=self.odom_sigma_pos, sigma_ang=self.odom_sigma_ang)

    def steps_for(self, agent: int) -> int:
        if self.n_steps_per_agent is not None:
            return self.n_steps_per_agent[agent]
        return self.n_steps

    def turn_interval_for(self, agent: int) -> int:
        if self.steps_between_turns_per_agent is not None:
            return self.steps_between_turns_per_agent[agent]
        return self.steps_between_turns

    def initial_pose_for(self, agent: int) -> GridPose:
        if self.initial_poses is not None:
            return self.initial_poses[agent].to_grid_pose()
        return GridPose(0, 0, 0)


class LoggingConfig(_FrozenModel):
    """Configuration for structured logging."""

    level: str = Field(
        default_factory=lambda: os.environ.get(LOG_LEVEL_ENV_VAR, "WARNING"),
        description="Logging level",
    )
    json_logs: StrictBool = Field(default=False, description="Render log events as JSON lines")

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level


class MetricsConfig(_FrozenModel):
    """Configuration for metrics collection."""

    enable_prometheus: StrictBool = Field(default=False, description="Mirror metrics into a Prometheus registry")
    metrics_prefix: str = Field(default="cslamgen", description="Prefix for metric names")


def default_thread_count() -> Optional[int]:
    """Worker count from the environment, or None to let the executor decide."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return value if value > 0 else None


def _describe_error(error: Mapping[str, Any]) -> str:
    loc = ".".join(str(part) for part in error.get("loc", ())) or "config"
    ctx = error.get("ctx") or {}
    kind = error.get("type")
    if kind == "greater_than_equal":
        return f"{loc} must be ≥ {ctx.get('ge')}"
    if kind == "less_than_equal":
        return f"{loc} must be ≤ {ctx.get('le')}"
    if kind == "greater_than":
        return f"{loc} must be > {ctx.get('gt')}"
    if kind == "extra_forbidden":
        return f"{loc}: unknown key"
    return f"{loc}: {error.get('msg')}"


def describe_validation_error(exc: ValidationError) -> List[str]:
    """Turn every error in a pydantic ValidationError into a one-line violation."""
    return [_describe_error(err) for err in exc.errors()]


def validate_config(cfg: Union[GenerationConfig, Mapping[str, Any]]) -> List[str]:
    """
    Check a configuration against every bound.

    Args:
        cfg: A GenerationConfig or a raw mapping (e.g. parsed JSON)

    Returns:
        All violations as ``"<field> ..."`` strings; empty when the config is ok
    """
    data: Dict[str, Any] = cfg.model_dump() if isinstance(cfg, GenerationConfig) else dict(cfg)
    try:
        GenerationConfig.model_validate(data)
    except ValidationError as exc:
        return describe_validation_error(exc)
    return []
