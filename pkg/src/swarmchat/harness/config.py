"""Declarative scenario files (YAML) with strict validation.

Unknown keys are rejected; invariant violations name the offending field.
Relative paths resolve against the scenario file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import yaml

from ..agents.anomalies import AnomalySpec
from ..errors import ScenarioError
from ..sim.grid import CellKind
from ..sim.kinematics import ArenaBounds, KinematicsParams

_TOP_KEYS = {
    "name", "arena", "grid", "n_robots", "initial_poses", "seed", "tick_budget",
    "round_period", "rounds_max", "radius", "anomalies", "controllers",
    "endpoint", "prompt_template", "kinematics", "history_rounds",
}
_ARENA_KEYS = {"width", "height", "center"}
_GRID_KEYS = {"file", "generator"}
_GENERATOR_KEYS = {"crop_fraction", "seed", "cell_size"}
_KINEMATICS_KEYS = {"axle_length", "max_speed", "tick_duration"}
_ANOMALY_KEYS = {"kind", "at_tick", "robot", "cell", "x", "y"}


def data_path(*parts: str) -> Path:
    """Path of a bundled data file (templates, controllers, scenarios)."""
    return Path(str(resources.files("swarmchat").joinpath("data", *parts)))


@dataclass(frozen=True)
class GridSpec:
    file: Path | None = None
    crop_fraction: float | None = None
    seed: int | None = None
    cell_size: float | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    arena_width: float
    arena_height: float
    arena_center: tuple[float, float]
    grid: GridSpec
    n_robots: int
    initial_poses: tuple[tuple[float, float, float], ...] | None
    seed: int
    tick_budget: int
    round_period: float
    rounds_max: int
    radius: float | None
    anomalies: tuple[tuple[AnomalySpec, int], ...]
    controllers: dict[int, Path]
    endpoint: str
    prompt_template: Path
    kinematics: KinematicsParams
    history_rounds: int
    base_dir: Path = field(default_factory=Path.cwd)

    @property
    def bounds(self) -> ArenaBounds:
        return ArenaBounds.centered(self.arena_width, self.arena_height, self.arena_center)

    @property
    def anomaly_kinds(self) -> list[str]:
        seen = []
        for spec, _ in self.anomalies:
            if spec.kind not in seen:
                seen.append(spec.kind)
        return seen

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)

    def with_endpoint(self, endpoint: str) -> "ScenarioConfig":
        return replace(self, endpoint=endpoint)


def _require(condition: bool, message: str):
    if not condition:
        raise ScenarioError(message)


def _check_keys(mapping: dict, allowed: set[str], where: str):
    unknown = set(mapping) - allowed
    _require(not unknown, f"{where}: unknown keys {sorted(unknown)}")


def _resolve(path_text: str, base: Path) -> Path:
    path = Path(path_text)
    if not path.is_absolute():
        path = (base / path).resolve()
    return path


def _parse_anomaly(entry: dict, index: int, tick_budget: int) -> tuple[AnomalySpec, int]:
    where = f"anomalies[{index}]"
    _require(isinstance(entry, dict), f"{where}: must be a mapping")
    _check_keys(entry, _ANOMALY_KEYS, where)
    kind = entry.get("kind")
    _require(kind in ("disable_wheels_all", "sensor_stuck", "place_injured"),
             f"{where}.kind: unknown anomaly kind {kind!r}")
    at_tick = entry.get("at_tick", 0)
    _require(isinstance(at_tick, int) and 0 <= at_tick <= tick_budget,
             f"{where}.at_tick: must be an integer in [0, tick_budget]")
    try:
        if kind == "sensor_stuck":
            spec = AnomalySpec(kind=kind, robot_id=int(entry["robot"]),
                               cell_kind=CellKind(entry["cell"]))
        elif kind == "place_injured":
            spec = AnomalySpec(kind=kind, x=float(entry["x"]), y=float(entry["y"]))
        else:
            spec = AnomalySpec(kind=kind)
    except (KeyError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None
    return spec, at_tick


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from None
    _require(isinstance(data, dict), f"{path}: scenario must be a mapping")
    return scenario_from_dict(data, base_dir=path.parent)


def scenario_from_dict(data: dict, base_dir: str | Path | None = None) -> ScenarioConfig:
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    _check_keys(data, _TOP_KEYS, "scenario")

    name = data.get("name")
    _require(isinstance(name, str) and name, "name: required non-empty string")

    arena = data.get("arena", {})
    _require(isinstance(arena, dict), "arena: must be a mapping")
    _check_keys(arena, _ARENA_KEYS, "arena")
    width = float(arena.get("width", 2.0))
    height = float(arena.get("height", 2.0))
    _require(width > 0 and height > 0, "arena: width and height must be positive")
    center_raw = arena.get("center", [0.0, 0.0])
    _require(isinstance(center_raw, (list, tuple)) and len(center_raw) == 2,
             "arena.center: must be [x, y]")
    center = (float(center_raw[0]), float(center_raw[1]))

    grid_raw = data.get("grid")
    _require(isinstance(grid_raw, dict), "grid: required mapping with 'file' or 'generator'")
    _check_keys(grid_raw, _GRID_KEYS, "grid")
    _require(("file" in grid_raw) != ("generator" in grid_raw),
             "grid: exactly one of 'file' or 'generator'")
    if "file" in grid_raw:
        grid_file = _resolve(str(grid_raw["file"]), base)
        _require(grid_file.exists(), f"grid.file: not found: {grid_file}")
        grid = GridSpec(file=grid_file)
    else:
        gen = grid_raw["generator"]
        _require(isinstance(gen, dict), "grid.generator: must be a mapping")
        _check_keys(gen, _GENERATOR_KEYS, "grid.generator")
        _require("crop_fraction" in gen and "cell_size" in gen,
                 "grid.generator: crop_fraction and cell_size are required")
        grid = GridSpec(crop_fraction=float(gen["crop_fraction"]),
                        seed=int(gen.get("seed", 0)),
                        cell_size=float(gen["cell_size"]))
        _require(0.0 <= grid.crop_fraction <= 1.0, "grid.generator.crop_fraction: must be in [0, 1]")
        _require(grid.cell_size > 0, "grid.generator.cell_size: must be positive")
        for dim_name, dim in (("width", width), ("height", height)):
            cells = dim / grid.cell_size
            _require(abs(cells - round(cells)) < 1e-9,
                     f"grid.generator.cell_size: arena {dim_name} must be a whole number of cells")

    n_robots = data.get("n_robots")
    _require(isinstance(n_robots, int) and n_robots >= 1, "n_robots: must be an integer >= 1")

    seed = data.get("seed", 0)
    _require(isinstance(seed, int), "seed: must be an integer")

    tick_budget = data.get("tick_budget")
    _require(isinstance(tick_budget, int) and tick_budget >= 1,
             "tick_budget: must be an integer >= 1")

    round_period = float(data.get("round_period", 10.0))
    _require(round_period > 0, "round_period: must be positive")

    rounds_max = data.get("rounds_max", 5)
    _require(isinstance(rounds_max, int) and rounds_max >= 0, "rounds_max: must be an integer >= 0")

    radius_raw = data.get("radius", "unlimited")
    if radius_raw == "unlimited" or radius_raw is None:
        radius = None
    else:
        radius = float(radius_raw)
        _require(radius >= 0, "radius: must be >= 0 or 'unlimited'")

    history_rounds = data.get("history_rounds", 3)
    _require(isinstance(history_rounds, int) and history_rounds >= 1,
             "history_rounds: must be an integer >= 1")

    kin_raw = data.get("kinematics", {})
    _require(isinstance(kin_raw, dict), "kinematics: must be a mapping")
    _check_keys(kin_raw, _KINEMATICS_KEYS, "kinematics")
    try:
        kinematics = KinematicsParams(**{k: float(v) for k, v in kin_raw.items()})
    except ValueError as exc:
        raise ScenarioError(f"kinematics: {exc}") from None

    bounds = ArenaBounds.centered(width, height, center)
    poses_raw = data.get("initial_poses", "random")
    if poses_raw == "random":
        initial_poses = None
    else:
        _require(isinstance(poses_raw, list) and len(poses_raw) == n_robots,
                 "initial_poses: must be 'random' or a list with one [x, y, theta] per robot")
        poses = []
        for i, entry in enumerate(poses_raw):
            _require(isinstance(entry, (list, tuple)) and len(entry) == 3,
                     f"initial_poses[{i}]: must be [x, y, theta]")
            x, y, theta = (float(v) for v in entry)
            _require(bounds.contains(x, y), f"initial_poses[{i}]: ({x}, {y}) outside the arena")
            poses.append((x, y, theta))
        initial_poses = tuple(poses)

    anomalies = tuple(_parse_anomaly(entry, i, tick_budget)
                      for i, entry in enumerate(data.get("anomalies", []) or []))
    for spec, _ in anomalies:
        if spec.kind == "sensor_stuck":
            _require(1 <= spec.robot_id <= n_robots,
                     f"anomalies: sensor_stuck robot {spec.robot_id} does not exist")
        if spec.kind == "place_injured":
            _require(bounds.contains(spec.x, spec.y),
                     f"anomalies: place_injured ({spec.x}, {spec.y}) outside the arena")

    controllers_raw = data.get("controllers", str(data_path("controllers", "random_walk.swarmctl")))
    controllers: dict[int, Path] = {}
    if isinstance(controllers_raw, str):
        controller_path = _resolve(controllers_raw, base)
        controllers = {rid: controller_path for rid in range(1, n_robots + 1)}
    elif isinstance(controllers_raw, dict):
        for rid_raw, path_text in controllers_raw.items():
            rid = int(rid_raw)
            _require(1 <= rid <= n_robots, f"controllers: robot {rid} does not exist")
            controllers[rid] = _resolve(str(path_text), base)
        _require(set(controllers) == set(range(1, n_robots + 1)),
                 "controllers: a per-robot mapping must cover every robot")
    else:
        raise ScenarioError("controllers: must be a path or a {robot_id: path} mapping")
    for rid, cpath in controllers.items():
        _require(cpath.exists(), f"controllers: file not found for robot {rid}: {cpath}")

    endpoint = data.get("endpoint", "oracle")
    _require(isinstance(endpoint, str) and endpoint, "endpoint: must be a non-empty string")

    template_raw = data.get("prompt_template")
    if template_raw is None:
        prompt_template = data_path("templates", "field_survey.txt")
    else:
        prompt_template = _resolve(str(template_raw), base)
        _require(prompt_template.exists(), f"prompt_template: not found: {prompt_template}")

    return ScenarioConfig(
        name=name,
        arena_width=width,
        arena_height=height,
        arena_center=center,
        grid=grid,
        n_robots=n_robots,
        initial_poses=initial_poses,
        seed=seed,
        tick_budget=tick_budget,
        round_period=round_period,
        rounds_max=rounds_max,
        radius=radius,
        anomalies=anomalies,
        controllers=controllers,
        endpoint=endpoint,
        prompt_template=prompt_template,
        kinematics=kinematics,
        history_rounds=history_rounds,
        base_dir=base,
    )


def bundled_scenario(name: str) -> Path:
    """Path of a bundled scenario file by short name."""
    return data_path("scenarios", f"{name}.yaml")
