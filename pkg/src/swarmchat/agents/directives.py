"""Turning directives into wheel commands, one tick at a time."""

from __future__ import annotations

import math
from random import Random

from ..dsl.interp import RANDOM_WALK_SPEED_FRACTION, TURN_PROBABILITY, steer_to
from ..messages import Activity, Directive
from ..sim.kinematics import KinematicsParams, Pose, WheelCommand, ZERO_COMMAND

TARGET_REACHED_DISTANCE = 0.05  # meters


def apply_directive_tick(directive: Directive, pose: Pose, params: KinematicsParams,
                         rng: Random | None = None) -> tuple[WheelCommand, bool]:
    """Return (command, done). Done directives are cleared by the caller."""
    if directive.activity is Activity.STOP:
        return ZERO_COMMAND, True
    if directive.activity is Activity.TARGETED_NAVIGATION:
        tx, ty = directive.target  # type: ignore[misc]
        if math.hypot(tx - pose.x, ty - pose.y) <= TARGET_REACHED_DISTANCE:
            return ZERO_COMMAND, True
        return steer_to(pose, tx, ty, params), False
    # random walk: forward with occasional seeded one-tick spins; never completes
    speed = RANDOM_WALK_SPEED_FRACTION * params.max_speed
    if rng is not None and rng.random() < TURN_PROBABILITY:
        return WheelCommand(-speed, speed), False
    return WheelCommand(speed, speed), False
