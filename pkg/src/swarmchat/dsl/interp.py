"""Per-tick controller interpreter.

Action semantics:
  random_walk  forward at 0.8 * max_speed; turns in place for a seeded 1-10
               ticks after a wall clamp or with per-tick probability 0.02.
  goto(x, y)   turn toward the target, then drive with a small differential
               correction so the heading stays locked while moving.
  stop         zero command.

Guards are evaluated after the action, in declaration order; the first match
wins. after(n) fires on the n-th tick spent in the state, so a state entered
during tick T transitions during tick T+n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from random import Random

from ..sim.kinematics import (KinematicsParams, Pose, WheelCommand,
                              ZERO_COMMAND, normalize_angle)
from .ast import (Action, AfterGuard, AtTargetGuard, ControllerProgram, Goto,
                  Guard, RandomWalk, StateDef, Stop)

RANDOM_WALK_SPEED_FRACTION = 0.8
TURN_PROBABILITY = 0.02
HEADING_ALIGN_TOL = 0.05  # radians


@dataclass(frozen=True)
class ControllerRuntime:
    """Interpreter state carried between ticks for one robot."""

    state: str
    ticks_in_state: int = 0
    turn_ticks_left: int = 0
    turn_direction: float = 1.0
    wall_contact: bool = False


def initial_runtime(program: ControllerProgram) -> ControllerRuntime:
    return ControllerRuntime(state=program.initial)


def steer_to(pose: Pose, tx: float, ty: float, params: KinematicsParams) -> WheelCommand:
    """Steering law shared by goto states and navigation directives."""
    dx, dy = tx - pose.x, ty - pose.y
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return ZERO_COMMAND
    err = normalize_angle(math.atan2(dy, dx) - pose.theta)
    dt = params.tick_duration
    half_axle = params.axle_length / 2.0
    if abs(err) > HEADING_ALIGN_TOL:
        speed = min(params.max_speed, abs(err) * half_axle / dt)
        speed = math.copysign(speed, err)
        return WheelCommand(-speed, speed)
    # exact heading correction within one tick, small because err is small
    w = err * half_axle / dt
    v = min(params.max_speed - abs(w), dist / dt)
    return WheelCommand(v - w, v + w)


def _random_walk(runtime: ControllerRuntime, rng: Random,
                 params: KinematicsParams) -> tuple[WheelCommand, ControllerRuntime]:
    turn_left = runtime.turn_ticks_left
    direction = runtime.turn_direction
    if turn_left == 0 and (runtime.wall_contact or rng.random() < TURN_PROBABILITY):
        turn_left = rng.randint(1, 10)
        direction = rng.choice((-1.0, 1.0))
    speed = RANDOM_WALK_SPEED_FRACTION * params.max_speed
    if turn_left > 0:
        cmd = WheelCommand(-speed * direction, speed * direction)
        turn_left -= 1
    else:
        cmd = WheelCommand(speed, speed)
    runtime = replace(runtime, turn_ticks_left=turn_left, turn_direction=direction,
                      wall_contact=False)
    return cmd, runtime


def _run_action(action: Action, runtime: ControllerRuntime, pose: Pose, rng: Random,
                params: KinematicsParams) -> tuple[WheelCommand, ControllerRuntime]:
    if isinstance(action, Stop):
        return ZERO_COMMAND, runtime
    if isinstance(action, Goto):
        return steer_to(pose, action.x, action.y, params), runtime
    if isinstance(action, RandomWalk):
        return _random_walk(runtime, rng, params)
    raise TypeError(f"unknown action {action!r}")


def _guard_fires(guard: Guard, state: StateDef, runtime: ControllerRuntime, pose: Pose) -> bool:
    if isinstance(guard, AfterGuard):
        return runtime.ticks_in_state >= guard.ticks
    if isinstance(guard, AtTargetGuard):
        if not isinstance(state.action, Goto):
            return False
        return math.hypot(state.action.x - pose.x, state.action.y - pose.y) <= guard.tolerance
    raise TypeError(f"unknown guard {guard!r}")


def exec_controller_tick(program: ControllerProgram, runtime: ControllerRuntime,
                         pose: Pose, rng: Random,
                         params: KinematicsParams) -> tuple[WheelCommand, ControllerRuntime]:
    state = program.state_map[runtime.state]
    cmd, runtime = _run_action(state.action, runtime, pose, rng, params)
    runtime = replace(runtime, ticks_in_state=runtime.ticks_in_state + 1)
    for tr in state.transitions:
        if _guard_fires(tr.guard, state, runtime, pose):
            runtime = ControllerRuntime(state=tr.target)
            break
    return cmd.clamped(params.max_speed), runtime
