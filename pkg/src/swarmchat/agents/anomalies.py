"""Showcase anomaly injection."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..sim.grid import CellKind
from ..sim.world import SimState

ANOMALY_KINDS = ("disable_wheels_all", "sensor_stuck", "place_injured")


@dataclass(frozen=True)
class AnomalySpec:
    kind: str
    robot_id: int | None = None
    cell_kind: CellKind | None = None
    x: float | None = None
    y: float | None = None

    def __post_init__(self):
        if self.kind not in ANOMALY_KINDS:
            raise ValueError(f"kind must be one of {ANOMALY_KINDS}, got {self.kind!r}")
        if self.kind == "sensor_stuck" and (self.robot_id is None or self.cell_kind is None):
            raise ValueError("sensor_stuck requires robot_id and cell_kind")
        if self.kind == "place_injured" and (self.x is None or self.y is None):
            raise ValueError("place_injured requires x and y")

    def describe(self) -> str:
        if self.kind == "sensor_stuck":
            return f"sensor_stuck(robot {self.robot_id}, {self.cell_kind.value})"
        if self.kind == "place_injured":
            return f"place_injured({self.x}, {self.y})"
        return self.kind


def inject_anomaly(sim: SimState, spec: AnomalySpec) -> SimState:
    if spec.kind == "disable_wheels_all":
        robots = tuple(replace(r, wheels_enabled=False) for r in sim.robots)
        return replace(sim, robots=robots)
    if spec.kind == "sensor_stuck":
        robot = sim.robot(spec.robot_id)  # raises UnknownRobotError
        return sim.replace_robot(replace(robot, sensor_stuck=spec.cell_kind))
    # place_injured; cell_index validates the coordinates are inside the arena
    grid = sim.grid.with_cell(spec.x, spec.y, CellKind.INJURED_PERSON)
    return replace(sim, grid=grid)
