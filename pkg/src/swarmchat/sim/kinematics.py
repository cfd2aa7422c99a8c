"""Differential-drive kinematics on a bounded planar arena."""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to [-pi, pi). Values already in range pass through unchanged."""
    if -math.pi <= theta < math.pi:
        return theta
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class ArenaBounds:
    """Axis-aligned rectangle the robots are confined to."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("arena bounds must have positive extent")

    @classmethod
    def centered(cls, width: float, height: float,
                 center: tuple[float, float] = (0.0, 0.0)) -> "ArenaBounds":
        cx, cy = center
        return cls(cx - width / 2.0, cx + width / 2.0, cy - height / 2.0, cy + height / 2.0)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, self.x_min), self.x_max),
                min(max(y, self.y_min), self.y_max))


@dataclass(frozen=True)
class Pose:
    """Planar pose; theta in radians, normalized to [-pi, pi)."""

    x: float
    y: float
    theta: float


@dataclass(frozen=True)
class WheelCommand:
    """Left/right wheel speeds in meters per second."""

    left: float
    right: float

    def clamped(self, max_speed: float) -> "WheelCommand":
        l = min(max(self.left, -max_speed), max_speed)
        r = min(max(self.right, -max_speed), max_speed)
        if l == self.left and r == self.right:
            return self
        return WheelCommand(l, r)


ZERO_COMMAND = WheelCommand(0.0, 0.0)


@dataclass(frozen=True)
class KinematicsParams:
    """Robot body parameters and the simulation time step."""

    axle_length: float = 0.053
    max_speed: float = 0.12
    tick_duration: float = 0.1

    def __post_init__(self):
        for name in ("axle_length", "max_speed", "tick_duration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def sensing_period_ticks(self) -> int:
        """Ticks per one simulated second of sensing cadence."""
        return max(1, math.ceil(1.0 / self.tick_duration))


def step_pose(pose: Pose, cmd: WheelCommand, params: KinematicsParams,
              bounds: ArenaBounds | None = None) -> Pose:
    """Advance one tick with exact-arc unicycle integration.

    v = (left+right)/2, omega = (right-left)/axle_length. A zero command is an
    exact fixpoint. When bounds are given the position is clamped to them; the
    heading is kept (no bounce).
    """
    v = 0.5 * (cmd.left + cmd.right)
    omega = (cmd.right - cmd.left) / params.axle_length
    dt = params.tick_duration
    if v == 0.0 and omega == 0.0:
        x, y, theta = pose.x, pose.y, pose.theta
    elif omega == 0.0:
        x = pose.x + v * dt * math.cos(pose.theta)
        y = pose.y + v * dt * math.sin(pose.theta)
        theta = pose.theta
    else:
        radius = v / omega
        theta_new = pose.theta + omega * dt
        x = pose.x + radius * (math.sin(theta_new) - math.sin(pose.theta))
        y = pose.y - radius * (math.cos(theta_new) - math.cos(pose.theta))
        theta = theta_new
    theta = normalize_angle(theta)
    if bounds is not None:
        x, y = bounds.clamp(x, y)
    return Pose(x, y, theta)
