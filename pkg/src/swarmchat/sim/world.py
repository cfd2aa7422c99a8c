"""Simulation state containers and the per-tick stepping loop."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Callable, Mapping

from ..agents.directives import apply_directive_tick
from ..dsl.ast import ControllerProgram
from ..dsl.interp import ControllerRuntime, exec_controller_tick
from ..errors import UnknownRobotError
from ..messages import BroadcastMessage, Directive
from .grid import CellKind, FloorGrid, SensorReading, sense_floor
from .kinematics import (ArenaBounds, KinematicsParams, Pose, ZERO_COMMAND,
                         step_pose)

# kind, robot id (or None), payload text
EventSink = Callable[[str, int | None, str], None]


@dataclass(frozen=True)
class RobotState:
    id: int
    pose: Pose
    wheels_enabled: bool = True
    sensor_stuck: CellKind | None = None
    sensor_log: tuple[SensorReading, ...] = ()
    inbox: tuple[BroadcastMessage, ...] = ()
    controller_runtime: ControllerRuntime | None = None
    pending_directive: Directive | None = None


@dataclass
class SimState:
    """World snapshot between ticks; advance_tick returns a fresh instance."""

    tick: int
    robots: tuple[RobotState, ...]
    grid: FloorGrid
    rng: random.Random
    params: KinematicsParams

    def __post_init__(self):
        ids = [r.id for r in self.robots]
        if ids != sorted(set(ids)):
            raise ValueError("robot ids must be unique and stored in ascending order")

    @property
    def bounds(self) -> ArenaBounds:
        return self.grid.bounds

    def robot(self, robot_id: int) -> RobotState:
        for robot in self.robots:
            if robot.id == robot_id:
                return robot
        raise UnknownRobotError(robot_id)

    def replace_robot(self, updated: RobotState) -> "SimState":
        robots = tuple(updated if r.id == updated.id else r for r in self.robots)
        if all(r.id != updated.id for r in self.robots):
            raise UnknownRobotError(updated.id)
        return replace(self, robots=robots)


def neighbors_within_radius(sim: SimState, robot_id: int,
                            radius: float | None) -> list[int]:
    """Ids of other robots within Euclidean `radius`; None means unlimited.

    Result is ascending by id for determinism.
    """
    if radius is not None and radius < 0:
        raise ValueError("radius must be >= 0 or None for unlimited")
    me = sim.robot(robot_id)
    out = []
    for other in sim.robots:
        if other.id == robot_id:
            continue
        if radius is None or math.hypot(other.pose.x - me.pose.x,
                                        other.pose.y - me.pose.y) <= radius:
            out.append(other.id)
    return out


def advance_tick(sim: SimState, controllers: Mapping[int, ControllerProgram],
                 on_event: EventSink | None = None) -> SimState:
    """Advance the world by exactly one tick.

    Per robot, in ascending id order: a pending directive (until done) or the
    DSL controller produces a wheel command, forced to zero while wheels are
    disabled; the pose advances with wall clamping; on ticks crossing a whole
    simulated second a SensorReading is appended (substituting the stuck kind
    if set). Controller errors halt the robot for the tick and are reported
    through on_event; the simulation continues.
    """
    new_tick = sim.tick + 1
    bounds = sim.grid.bounds
    sense_now = new_tick % sim.params.sensing_period_ticks == 0
    new_robots = []
    for robot in sim.robots:
        runtime = robot.controller_runtime
        directive = robot.pending_directive
        cmd = ZERO_COMMAND
        if directive is not None:
            cmd, done = apply_directive_tick(directive, robot.pose, sim.params, sim.rng)
            if done:
                directive = None
        else:
            program = controllers.get(robot.id)
            if program is not None and runtime is not None:
                try:
                    cmd, runtime = exec_controller_tick(program, runtime, robot.pose,
                                                        sim.rng, sim.params)
                except Exception as exc:  # controller bugs halt the robot, not the run
                    cmd = ZERO_COMMAND
                    if on_event is not None:
                        on_event("diagnostic", robot.id, f"controller error: {exc}")
        if not robot.wheels_enabled:
            cmd = ZERO_COMMAND
        cmd = cmd.clamped(sim.params.max_speed)
        free = step_pose(robot.pose, cmd, sim.params)
        cx, cy = bounds.clamp(free.x, free.y)
        hit_wall = cx != free.x or cy != free.y  # a clamp event, not wall adjacency
        pose = Pose(cx, cy, free.theta) if hit_wall else free
        if runtime is not None and runtime.wall_contact != hit_wall:
            runtime = replace(runtime, wall_contact=hit_wall)
        log = robot.sensor_log
        if sense_now:
            reading = sense_floor(sim.grid, pose, new_tick)
            if robot.sensor_stuck is not None:
                reading = replace(reading, kind=robot.sensor_stuck)
            log = log + (reading,)
        new_robots.append(replace(robot, pose=pose, controller_runtime=runtime,
                                  pending_directive=directive, sensor_log=log))
    return replace(sim, tick=new_tick, robots=tuple(new_robots))
