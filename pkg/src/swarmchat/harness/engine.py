"""End-to-end scenario execution: ticks interleaved with discussion rounds.

A run directory receives:
    transcript.jsonl   prompt/response/broadcast/directive/anomaly/diagnostic
    poses.jsonl        one line per tick with every robot pose
    run_config.json    resolved scenario snapshot incl. final grid rows
    metrics.json       RunMetrics

Identical (config, seed, deterministic backend) produce byte-identical
transcript and pose files.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path
from typing import IO

from ..agents.anomalies import inject_anomaly
from ..agents.prompts import PromptTemplate, RobotAgentState
from ..agents.rounds import run_discussion_round
from ..dsl.ast import ControllerProgram
from ..dsl.parser import parse_program
from ..errors import ScenarioError
from ..llm.client import ChatClient, client_from_profile
from ..messages import Directive
from ..sim.grid import FloorGrid, generate_grid, load_grid_file
from ..sim.kinematics import Pose, normalize_angle
from ..sim.world import RobotState, SimState, advance_tick
from ..dsl.interp import initial_runtime
from .config import ScenarioConfig
from .metrics import RunMetrics, evaluate_metrics
from .transcript import TranscriptRecord, TranscriptWriter

PLACEMENT_MARGIN = 0.05  # meters kept from the walls when placing randomly


def build_grid(config: ScenarioConfig) -> FloorGrid:
    spec = config.grid
    if spec.file is not None:
        grid = load_grid_file(spec.file, center=config.arena_center)
    else:
        width_cells = round(config.arena_width / spec.cell_size)
        height_cells = round(config.arena_height / spec.cell_size)
        grid = generate_grid(width_cells, height_cells, spec.cell_size,
                             spec.crop_fraction, spec.seed, center=config.arena_center)
    bounds = grid.bounds
    if (abs(bounds.width - config.arena_width) > 1e-9
            or abs(bounds.height - config.arena_height) > 1e-9):
        raise ScenarioError(
            f"grid: grid extent {bounds.width} x {bounds.height} does not cover the "
            f"arena {config.arena_width} x {config.arena_height}")
    return grid


def load_controller(path: Path) -> ControllerProgram:
    result = parse_program(Path(path).read_text(encoding="utf-8"))
    if isinstance(result, list):
        details = "; ".join(str(d) for d in result)
        raise ScenarioError(f"controller {path}: {details}")
    return result


class ScenarioEngine:
    """Owns the world, the per-robot agents, and the persisted artifacts
    for one scenario execution."""

    def __init__(self, config: ScenarioConfig, client: ChatClient | None = None,
                 out_dir: str | Path | None = None,
                 controller_override: ControllerProgram | None = None):
        self.config = config
        self.client = client if client is not None else client_from_profile(
            config.endpoint, config.base_dir)
        self.out_dir = Path(out_dir) if out_dir is not None else None
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)

        grid = build_grid(config)
        rng = random.Random(config.seed)
        if controller_override is not None:
            self.controllers = {rid: controller_override for rid in range(1, config.n_robots + 1)}
        else:
            cache: dict[Path, ControllerProgram] = {}
            self.controllers = {}
            for rid, path in sorted(config.controllers.items()):
                if path not in cache:
                    cache[path] = load_controller(path)
                self.controllers[rid] = cache[path]

        bounds = grid.bounds
        robots = []
        for rid in range(1, config.n_robots + 1):
            if config.initial_poses is not None:
                x, y, theta = config.initial_poses[rid - 1]
            else:
                x = rng.uniform(bounds.x_min + PLACEMENT_MARGIN, bounds.x_max - PLACEMENT_MARGIN)
                y = rng.uniform(bounds.y_min + PLACEMENT_MARGIN, bounds.y_max - PLACEMENT_MARGIN)
                theta = normalize_angle(rng.uniform(-math.pi, math.pi))
            robots.append(RobotState(id=rid, pose=Pose(x, y, theta),
                                     controller_runtime=initial_runtime(self.controllers[rid])))
        self.sim = SimState(tick=0, robots=tuple(robots), grid=grid, rng=rng,
                            params=config.kinematics)
        self.template = PromptTemplate.from_file(config.prompt_template)
        self.agents = {}
        for rid in range(1, config.n_robots + 1):
            agent = RobotAgentState(rid)
            agent.conversation.append(ChatMessage(
                "system", self.template.system.replace("{{robot_id}}", str(rid))))
            self.agents[rid] = agent

        self.writer = TranscriptWriter(self.out_dir / "transcript.jsonl"
                                       if self.out_dir else None)
        self._poses_fh: IO[str] | None = (
            (self.out_dir / "poses.jsonl").open("w", encoding="utf-8")
            if self.out_dir else None)
        self.pose_history: list[tuple[int, list[tuple[int, float, float, float]]]] = []

        self.rounds_done = 0
        self.round_period_ticks = max(1, round(config.round_period
                                               / config.kinematics.tick_duration))
        self._anomalies_by_tick: dict[int, list] = {}
        for spec, at_tick in config.anomalies:
            self._anomalies_by_tick.setdefault(at_tick, []).append(spec)
        self.metrics: RunMetrics | None = None

        self._apply_anomalies(0)
        self._log_poses()

    # -- stepping ---------------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.sim.tick >= self.config.tick_budget

    def step_tick(self):
        """Advance one tick; run a discussion round and inject anomalies when due."""
        if self.finished:
            return
        self.sim = advance_tick(self.sim, self.controllers, on_event=self._emit)
        self._log_poses()
        if (self.client is not None and self.rounds_done < self.config.rounds_max
                and self.sim.tick % self.round_period_ticks == 0):
            self.rounds_done += 1
            self.sim, records = run_discussion_round(
                self.sim, self.agents, self.config, self.client,
                self.rounds_done, self.template)
            for kind, robot, payload in records:
                self._emit(kind, robot, payload)
        self._apply_anomalies(self.sim.tick)

    def run(self) -> RunMetrics:
        while not self.finished:
            self.step_tick()
        return self.finalize()

    def finalize(self) -> RunMetrics:
        if self.metrics is None:
            self.metrics = evaluate_metrics(self.sim, self.writer.records,
                                            self.config, self.pose_history)
            if self.out_dir is not None:
                (self.out_dir / "metrics.json").write_text(
                    json.dumps(self.metrics.to_dict(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
                (self.out_dir / "run_config.json").write_text(
                    json.dumps(self._config_snapshot(), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
        return self.metrics

    def close(self):
        self.writer.close()
        if self._poses_fh is not None:
            self._poses_fh.close()
            self._poses_fh = None

    # -- operator-facing mutations ----------------------------------------

    def install_directive(self, robot_id: int, directive: Directive):
        robot = self.sim.robot(robot_id)
        from dataclasses import replace as _replace

        self.sim = self.sim.replace_robot(_replace(robot, pending_directive=directive))
        self._emit("directive", robot_id, json.dumps(
            {"activity": directive.activity.value, "target": directive.target},
            sort_keys=True))

    # -- internals ---------------------------------------------------------

    def _emit(self, kind: str, robot: int | None, payload: str) -> TranscriptRecord:
        return self.writer.emit(self.sim.tick, kind, robot, payload)

    def _apply_anomalies(self, tick: int):
        for spec in self._anomalies_by_tick.get(tick, []):
            self.sim = inject_anomaly(self.sim, spec)
            self._emit("anomaly", spec.robot_id, spec.describe())

    def _log_poses(self):
        row = [(r.id, r.pose.x, r.pose.y, r.pose.theta) for r in self.sim.robots]
        self.pose_history.append((self.sim.tick, row))
        if self._poses_fh is not None:
            self._poses_fh.write(json.dumps(
                {"tick": self.sim.tick, "poses": [[i, x, y, t] for i, x, y, t in row]}) + "\n")
            self._poses_fh.flush()

    def _config_snapshot(self) -> dict:
        crops = weeds = injured = 0
        rows = []
        for row in reversed(self.sim.grid.rows):  # top-down, matching the map format
            chars = []
            for cell in row:
                chars.append({"crops": "c", "weeds": "w", "injured_person": "i"}[cell.value])
                if cell.value == "crops":
                    crops += 1
                elif cell.value == "weeds":
                    weeds += 1
                else:
                    injured += 1
            rows.append("".join(chars))
        bounds = self.sim.grid.bounds
        return {
            "scenario": self.config.name,
            "seed": self.config.seed,
            "n_robots": self.config.n_robots,
            "tick_budget": self.config.tick_budget,
            "rounds_max": self.config.rounds_max,
            "radius": self.config.radius,
            "anomaly_kinds": self.config.anomaly_kinds,
            "arena": {"x_min": bounds.x_min, "x_max": bounds.x_max,
                      "y_min": bounds.y_min, "y_max": bounds.y_max},
            "cell_size": self.sim.grid.cell_size,
            "grid_rows": rows,
            "grid_counts": {"crops": crops, "weeds": weeds, "injured_person": injured},
        }


def run_scenario(config: ScenarioConfig, client: ChatClient | None = None,
                 out_dir: str | Path | None = None,
                 controller_override: ControllerProgram | None = None
                 ) -> tuple[RunMetrics, list[TranscriptRecord]]:
    engine = ScenarioEngine(config, client=client, out_dir=out_dir,
                            controller_override=controller_override)
    try:
        metrics = engine.run()
    finally:
        engine.close()
    return metrics, engine.writer.records
