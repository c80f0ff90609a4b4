"""
Reading and writing datasets: .g2o, the multi-g2o tree, .tum ground truth and JSON configs.

Layout of a multi-g2o tree::

    root/
    |-- inter_agent_lc.dat
    |-- agent1/
    |   |-- posegraph.g2o
    |   |-- agent1_GT.tum
    |-- agent2/
    ...

Agent folders and the agent columns of ``inter_agent_lc.dat`` are 1-based;
in memory agents are 0-based.
"""

import json
import math
import re
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from .config import GenerationConfig, describe_validation_error
from .exceptions import (
    ConfigurationError,
    DatasetIOError,
    LayoutError,
    MissingFileError,
    NonNumericFieldError,
    ParseError,
    TokenCountError,
)
from .logging_setup import get_logger
from .model import (
    AgentGraph,
    Edge,
    EdgeKind,
    GridPose,
    InformationMatrix,
    InterAgentEdge,
    MultiGraph,
    RelativeMeasurement,
    ScaledPose,
    wrap_angle,
    wrap_quarter_turns,
)

logger = get_logger(__name__)

PathLike = Union[str, Path]

INTER_LC_FILE = "inter_agent_lc.dat"
POSEGRAPH_FILE = "posegraph.g2o"
CONFIG_FILE = "config.json"
VERTEX_TAG = "VERTEX_SE2"
EDGE_TAG = "EDGE_SE2"
VERTEX_TOKENS = 5
EDGE_TOKENS = 12
INTER_LC_TOKENS = 13
TUM_TOKENS = 8

_AGENT_DIR = re.compile(r"^agent(\d+)$")
_RANGE_ERRORS = {"greater_than_equal", "less_than_equal", "greater_than", "less_than", "finite_number"}
_GRID_TOLERANCE = 1e-6
_SCALE_DENOMINATOR = 10**6
_SCALE_SNAP_RTOL = 1e-12


def agent_dir_name(agent: int) -> str:
    return f"agent{agent + 1}"


def tum_file_name(agent: int) -> str:
    return f"agent{agent + 1}_GT.tum"


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly ``value``; integral values print without a decimal point."""
    v = float(value)
    if v == 0.0:
        return "0"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


@dataclass(frozen=True)
class G2oVertex:
    """``VERTEX_SE2 K x y yaw``"""

    id: int
    x: float
    y: float
    yaw: float

    def render(self) -> str:
        return f"{VERTEX_TAG} {self.id} {format_number(self.x)} {format_number(self.y)} {format_number(self.yaw)}"


@dataclass(frozen=True)
class G2oEdge:
    """``EDGE_SE2 K_A K_B Dx Dy Dyaw I_11 I_12 I_13 I_22 I_23 I_33``"""

    id_a: int
    id_b: int
    dx: float
    dy: float
    dyaw: float
    info: InformationMatrix

    def render(self) -> str:
        values = (self.dx, self.dy, self.dyaw, *self.info.upper_triangle())
        return f"{EDGE_TAG} {self.id_a} {self.id_b} " + " ".join(format_number(v) for v in values)

    @property
    def measurement(self) -> RelativeMeasurement:
        return RelativeMeasurement(self.dx, self.dy, self.dyaw, self.info)


@dataclass(frozen=True)
class InterLcLine:
    """``A1 K1 A2 K2 Dx Dy Dyaw I_11 ... I_33`` with 1-based agent numbers."""

    a1: int
    k1: int
    a2: int
    k2: int
    dx: float
    dy: float
    dyaw: float
    info: InformationMatrix

    @classmethod
    def from_edge(cls, edge: InterAgentEdge) -> "InterLcLine":
        info = edge.meas.info or InformationMatrix.identity()
        m = edge.meas
        return cls(edge.agent_a + 1, edge.node_a, edge.agent_b + 1, edge.node_b, m.dx, m.dy, m.dtheta, info)

    def to_edge(self) -> InterAgentEdge:
        meas = RelativeMeasurement(self.dx, self.dy, self.dyaw, self.info)
        return InterAgentEdge(self.a1 - 1, self.k1, self.a2 - 1, self.k2, meas)

    def render(self) -> str:
        values = (self.dx, self.dy, self.dyaw, *self.info.upper_triangle())
        return f"{self.a1} {self.k1} {self.a2} {self.k2} " + " ".join(format_number(v) for v in values)


@dataclass(frozen=True)
class G2oDocument:
    vertices: Tuple[G2oVertex, ...]
    edges: Tuple[G2oEdge, ...]


# Writing


def _write_lines(path: Path, lines: Sequence[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for line in lines:
                handle.write(line)
                handle.write("\n")
    except OSError as exc:
        raise DatasetIOError(f"Cannot write file: {exc.strerror or exc}", path=path) from exc


def _edge_line(edge_from: int, edge_to: int, meas: RelativeMeasurement) -> G2oEdge:
    info = meas.info or InformationMatrix.identity()
    return G2oEdge(edge_from, edge_to, meas.dx, meas.dy, meas.dtheta, info)


def _agent_records(agent: AgentGraph, offset: int = 0) -> Tuple[List[G2oVertex], List[G2oEdge]]:
    estimates = agent.estimates
    if not estimates:
        raise ValueError("Agent graph has no vertex estimates to write")
    vertices = [G2oVertex(offset + k, p.x, p.y, p.heading) for k, p in enumerate(estimates)]
    edges = [_edge_line(offset + e.from_id, offset + e.to_id, e.meas) for e in agent.odometry]
    edges += [_edge_line(offset + e.from_id, offset + e.to_id, e.meas) for e in agent.intra_lc]
    return vertices, edges


def write_agent_g2o(agent: AgentGraph, path: PathLike) -> None:
    """
    Write one agent's graph: all vertices, then odometry edges, then intra-agent closures.

    Node ids are 0-based and local to the agent; vertices carry the
    dead-reckoned estimates.
    """
    vertices, edges = _agent_records(agent)
    _write_lines(Path(path), [v.render() for v in vertices] + [e.render() for e in edges])


def write_concatenated_g2o(multi: MultiGraph, path: PathLike) -> None:
    """
    Write all agents into one .g2o file.

    Agent a's node k gets global id offset(a) + k; inter-agent closures become
    EDGE_SE2 rows between global ids after all per-agent edges.
    """
    offsets = multi.offsets()
    vertices: List[G2oVertex] = []
    edges: List[G2oEdge] = []
    for agent, offset in zip(multi.agents, offsets):
        v, e = _agent_records(agent, offset)
        vertices.extend(v)
        edges.extend(e)
    for lc in multi.inter_lc:
        edges.append(_edge_line(offsets[lc.agent_a] + lc.node_a, offsets[lc.agent_b] + lc.node_b, lc.meas))
    _write_lines(Path(path), [v.render() for v in vertices] + [e.render() for e in edges])
    logger.info("concatenated_g2o_written", path=str(path), vertices=len(vertices), edges=len(edges))


def tum_quaternion(heading: float) -> Tuple[float, float, float, float]:
    """Yaw-only unit quaternion (qx, qy, qz, qw) with qw >= 0."""
    theta = heading if heading > -math.pi else heading + 2.0 * math.pi
    return 0.0, 0.0, math.sin(theta / 2.0), math.cos(theta / 2.0)


def write_tum(traj: Sequence[ScaledPose], path: PathLike) -> None:
    """One ``timestamp tx ty tz qx qy qz qw`` row per pose; the timestamp is the node index."""
    if not traj:
        raise ValueError("Cannot write an empty trajectory")
    lines = []
    for idx, pose in enumerate(traj):
        qx, qy, qz, qw = tum_quaternion(pose.heading)
        values = (pose.x, pose.y, 0.0, qx, qy, qz, qw)
        lines.append(f"{idx:.6f} " + " ".join(format_number(v) for v in values))
    _write_lines(Path(path), lines)


def _clear_previous(root: Path) -> None:
    for child in root.iterdir():
        if child.is_dir() and _AGENT_DIR.match(child.name):
            shutil.rmtree(child)
        elif child.name in (INTER_LC_FILE, CONFIG_FILE):
            child.unlink()


def write_multig2o(
    multi: MultiGraph,
    root: PathLike,
    *,
    overwrite: bool = False,
    config: Optional[GenerationConfig] = None,
    max_workers: Optional[int] = None,
) -> Path:
    """
    Write the multi-g2o tree.

    Args:
        multi: Complete dataset
        root: Target directory
        overwrite: Replace an existing dataset in a non-empty target
        config: When given, also saved as ``config.json`` in the root
        max_workers: Threads for writing per-agent files

    Returns:
        The root path

    Raises:
        DatasetIOError: If the target is non-empty and overwrite is not set
    """
    root = Path(root)
    try:
        if root.exists():
            if not root.is_dir():
                raise DatasetIOError("Target exists and is not a directory", path=root)
            if any(root.iterdir()):
                if not overwrite:
                    raise DatasetIOError("Target directory is not empty; pass overwrite to replace it", path=root)
                _clear_previous(root)
        root.mkdir(parents=True, exist_ok=True)
        for idx in range(multi.n_agents):
            (root / agent_dir_name(idx)).mkdir()
    except OSError as exc:
        raise DatasetIOError(f"Cannot prepare dataset directory: {exc.strerror or exc}", path=root) from exc

    def write_agent(idx: int) -> None:
        folder = root / agent_dir_name(idx)
        write_agent_g2o(multi.agents[idx], folder / POSEGRAPH_FILE)
        if multi.agents[idx].ground_truth:
            write_tum(multi.scaled_ground_truth(idx), folder / tum_file_name(idx))

    agents = list(range(multi.n_agents))
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            list(pool.map(write_agent, agents))
    else:
        for idx in agents:
            write_agent(idx)

    _write_lines(root / INTER_LC_FILE, [InterLcLine.from_edge(e).render() for e in multi.inter_lc])
    if config is not None:
        save_config(config, root / CONFIG_FILE)
    logger.info("multig2o_written", root=str(root), agents=multi.n_agents, inter_lc=len(multi.inter_lc))
    return root


# Parsing


def _read_lines(path: Path) -> List[Tuple[int, List[str]]]:
    """Non-empty, non-comment lines as (1-based line number, tokens)."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise MissingFileError(path) from exc
    except OSError as exc:
        raise DatasetIOError(f"Cannot read file: {exc.strerror or exc}", path=path) from exc
    rows = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((number, stripped.split()))
    return rows


def _parse_int(token: str, path: Path, line: int) -> int:
    try:
        value = int(token)
    except ValueError as exc:
        raise NonNumericFieldError(token, path=path, line_number=line) from exc
    if value < 0:
        raise ParseError(f"identifier must be non-negative, got {value}", path=path, line_number=line)
    return value


def _parse_float(token: str, path: Path, line: int) -> float:
    try:
        value = float(token)
    except ValueError as exc:
        raise NonNumericFieldError(token, path=path, line_number=line) from exc
    if not math.isfinite(value):
        raise NonNumericFieldError(token, path=path, line_number=line)
    return value


def _check_tokens(record: str, tokens: List[str], expected: int, path: Path, line: int) -> None:
    if len(tokens) != expected:
        raise TokenCountError(record, expected, len(tokens), path=path, line_number=line)


def _parse_info(tokens: Sequence[str], path: Path, line: int) -> InformationMatrix:
    return InformationMatrix.from_upper_triangle([_parse_float(t, path, line) for t in tokens])


def read_g2o(path: PathLike) -> G2oDocument:
    """Parse the 2-D subset of the .g2o format (VERTEX_SE2 / EDGE_SE2)."""
    path = Path(path)
    vertices: List[G2oVertex] = []
    edges: List[G2oEdge] = []
    for line, tokens in _read_lines(path):
        tag = tokens[0]
        if tag == VERTEX_TAG:
            _check_tokens(tag, tokens, VERTEX_TOKENS, path, line)
            x, y, yaw = (_parse_float(t, path, line) for t in tokens[2:5])
            vertices.append(G2oVertex(_parse_int(tokens[1], path, line), x, y, yaw))
        elif tag == EDGE_TAG:
            _check_tokens(tag, tokens, EDGE_TOKENS, path, line)
            dx, dy, dyaw = (_parse_float(t, path, line) for t in tokens[3:6])
            edges.append(
                G2oEdge(
                    _parse_int(tokens[1], path, line),
                    _parse_int(tokens[2], path, line),
                    dx,
                    dy,
                    dyaw,
                    _parse_info(tokens[6:12], path, line),
                )
            )
        else:
            raise ParseError(f"unsupported record type '{tag}'", path=path, line_number=line)
    return G2oDocument(tuple(vertices), tuple(edges))


def read_tum(path: PathLike) -> List[Tuple[float, ScaledPose]]:
    """Parse ``timestamp tx ty tz qx qy qz qw`` rows into (timestamp, planar pose)."""
    path = Path(path)
    rows = []
    for line, tokens in _read_lines(path):
        _check_tokens("TUM", tokens, TUM_TOKENS, path, line)
        stamp, x, y, _tz, _qx, _qy, qz, qw = (_parse_float(t, path, line) for t in tokens)
        rows.append((stamp, ScaledPose(x, y, wrap_angle(2.0 * math.atan2(qz, qw)))))
    return rows


def read_inter_lc(path: PathLike) -> List[InterLcLine]:
    path = Path(path)
    rows = []
    for line, tokens in _read_lines(path):
        _check_tokens("inter-agent loop closure", tokens, INTER_LC_TOKENS, path, line)
        a1, k1, a2, k2 = (_parse_int(t, path, line) for t in tokens[:4])
        dx, dy, dyaw = (_parse_float(t, path, line) for t in tokens[4:7])
        rows.append(InterLcLine(a1, k1, a2, k2, dx, dy, dyaw, _parse_info(tokens[7:13], path, line)))
    return rows


def _discover_agents(root: Path) -> List[Path]:
    found: Dict[int, Path] = {}
    for child in root.iterdir():
        match = _AGENT_DIR.match(child.name)
        if match and child.is_dir():
            found[int(match.group(1))] = child
    if not found:
        raise LayoutError("no agent folders found", path=root)
    numbers = sorted(found)
    if numbers != list(range(1, len(numbers) + 1)):
        raise LayoutError(f"non-contiguous agent indices: {numbers}", path=root)
    return [found[n] for n in numbers]


def _split_edges(edges: Sequence[G2oEdge], n_nodes: int, path: Path) -> Tuple[List[Edge], List[Edge]]:
    """The leading 0->1, 1->2, ... chain is odometry; every later edge is a loop closure."""
    odometry: List[Edge] = []
    intra: List[Edge] = []
    for e in edges:
        try:
            if not intra and len(odometry) < n_nodes - 1 and e.id_a == len(odometry) and e.id_b == e.id_a + 1:
                odometry.append(Edge(e.id_a, e.id_b, e.measurement, EdgeKind.ODOMETRY))
            else:
                intra.append(Edge(e.id_a, e.id_b, e.measurement, EdgeKind.INTRA_LC))
        except ValueError as exc:
            raise LayoutError(str(exc), path=path) from exc
    return odometry, intra


def _on_grid(value: float, path: Path) -> int:
    nearest = round(value)
    if abs(value - nearest) > _GRID_TOLERANCE:
        raise LayoutError(f"ground truth is not on the grid (value {value})", path=path)
    return int(nearest)


def _snap_scale(step: float) -> float:
    """Undo the few-ulp error of a measured step when it is a simple fraction."""
    snapped = float(Fraction(step).limit_denominator(_SCALE_DENOMINATOR))
    if abs(snapped - step) <= _SCALE_SNAP_RTOL * step:
        return snapped
    return step


def _infer_scale(trajectories: Sequence[Optional[List[ScaledPose]]]) -> Optional[float]:
    for traj in trajectories:
        if traj and len(traj) > 1:
            step = math.hypot(traj[1].x - traj[0].x, traj[1].y - traj[0].y)
            if step > 0:
                return _snap_scale(step)
    return None


def _dataset_scale(root: Path, truths: Sequence[Optional[List[ScaledPose]]]) -> float:
    """Scale from config.json when saved, else inferred from ground truth."""
    config_path = root / CONFIG_FILE
    if config_path.is_file():
        return load_config(config_path).scale
    scale = _infer_scale(truths)
    if scale is not None:
        return scale
    if any(truths):
        raise LayoutError(
            "cannot infer the grid scale: no agent has two distinct ground-truth poses "
            f"and {CONFIG_FILE} is absent",
            path=root,
        )
    return 1.0


def _to_grid(traj: Sequence[ScaledPose], scale: float, path: Path) -> Tuple[GridPose, ...]:
    poses = []
    for pose in traj:
        turns = _on_grid(pose.heading / (math.pi / 2.0), path)
        poses.append(
            GridPose(_on_grid(pose.x / scale, path), _on_grid(pose.y / scale, path), wrap_quarter_turns(turns))
        )
    return tuple(poses)


def parse_multig2o(root: PathLike, *, require_ground_truth: bool = False) -> MultiGraph:
    """
    Read a multi-g2o tree back into a MultiGraph.

    Ground truth comes from the .tum files and is snapped back onto the grid
    using the scale of a saved config.json, or else the scale inferred from
    consecutive poses. A missing .tum leaves that agent's ground truth empty
    unless ``require_ground_truth`` is set.

    Raises:
        MissingFileError: inter_agent_lc.dat or a posegraph.g2o is absent
        TokenCountError: a line has the wrong number of tokens
        NonNumericFieldError: a numeric field does not parse
        LayoutError: agent folders are not numbered 1..N, or ids are inconsistent
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetIOError("Dataset root is not a directory", path=root)
    inter_path = root / INTER_LC_FILE
    if not inter_path.is_file():
        raise MissingFileError(inter_path)

    folders = _discover_agents(root)
    documents: List[G2oDocument] = []
    truths: List[Optional[List[ScaledPose]]] = []
    for idx, folder in enumerate(folders):
        g2o_path = folder / POSEGRAPH_FILE
        if not g2o_path.is_file():
            raise MissingFileError(g2o_path)
        documents.append(read_g2o(g2o_path))
        tum_path = folder / tum_file_name(idx)
        if tum_path.is_file():
            truths.append([pose for _, pose in read_tum(tum_path)])
        elif require_ground_truth:
            raise MissingFileError(tum_path)
        else:
            truths.append(None)

    scale = _dataset_scale(root, truths)
    agents = []
    for idx, (folder, doc, truth) in enumerate(zip(folders, documents, truths)):
        g2o_path = folder / POSEGRAPH_FILE
        vertices = sorted(doc.vertices, key=lambda v: v.id)
        if [v.id for v in vertices] != list(range(len(vertices))):
            raise LayoutError("vertex ids are not 0..N-1", path=g2o_path)
        estimates = tuple(ScaledPose(v.x, v.y, v.yaw) for v in vertices)
        odometry, intra = _split_edges(doc.edges, len(estimates), g2o_path)
        ground_truth = _to_grid(truth, scale, folder / tum_file_name(idx)) if truth else ()
        try:
            agents.append(AgentGraph(ground_truth, tuple(odometry), tuple(intra), estimates))
        except ValueError as exc:
            raise LayoutError(str(exc), path=g2o_path) from exc

    try:
        inter = tuple(row.to_edge() for row in read_inter_lc(inter_path))
        multi = MultiGraph(agents=tuple(agents), inter_lc=inter, scale=scale)
    except ValueError as exc:
        raise LayoutError(str(exc), path=inter_path) from exc
    logger.info("multig2o_parsed", root=str(root), agents=len(agents), inter_lc=len(inter))
    return multi


# JSON configuration


def _classify(exc: ValidationError) -> str:
    kinds = {err.get("type") for err in exc.errors()}
    if kinds & _RANGE_ERRORS:
        return "out-of-range value"
    if "extra_forbidden" in kinds:
        return "unknown key"
    return "type mismatch"


def config_from_dict(data: Dict[str, Any], source: str = "<dict>") -> GenerationConfig:
    """Validate a parsed JSON object into a GenerationConfig, naming the failure kind."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: type mismatch: top-level JSON value must be an object")
    try:
        return GenerationConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0].get("loc", ()) if exc.errors() else ()
        raise ConfigurationError(
            f"{source}: {_classify(exc)}",
            config_key=".".join(str(p) for p in first) or None,
            violations=describe_validation_error(exc),
        ) from exc


def load_config(json_path: PathLike) -> GenerationConfig:
    """
    Load a generation config from JSON.

    Absent fields take their defaults; unknown keys are rejected.

    Raises:
        ConfigurationError: unreadable file, syntax error, type mismatch or out-of-range value
    """
    path = Path(json_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config file: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data, source=str(path))


def save_config(cfg: GenerationConfig, json_path: PathLike) -> None:
    """Write a config as JSON that :func:`load_config` reads back unchanged."""
    text = json.dumps(cfg.model_dump(mode="json", exclude_none=True), indent=2)
    _write_lines(Path(json_path), [text])
