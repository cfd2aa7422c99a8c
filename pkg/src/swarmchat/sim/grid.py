"""Typed floor grid covering the arena exactly, plus map loading and generation.

Map file format: a header line `width height cell_size`, then `height` rows of
the characters `c` (crops), `w` (weeds), `i` (injured_person). The first data
row is the top of the arena (maximum y).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from ..errors import OutOfBoundsError
from .kinematics import ArenaBounds, Pose


class CellKind(str, Enum):
    CROPS = "crops"
    WEEDS = "weeds"
    INJURED_PERSON = "injured_person"


_CHAR_TO_KIND = {"c": CellKind.CROPS, "w": CellKind.WEEDS, "i": CellKind.INJURED_PERSON}
_KIND_TO_CHAR = {v: k for k, v in _CHAR_TO_KIND.items()}


@dataclass(frozen=True)
class SensorReading:
    """One floor observation, stamped with the pose it was taken at."""

    kind: CellKind
    x: float
    y: float
    tick: int


@dataclass(frozen=True)
class FloorGrid:
    """Grid of floor cells; rows[0] is the bottom row (minimum y)."""

    cell_size: float
    rows: tuple[tuple[CellKind, ...], ...]
    x_min: float
    y_min: float

    def __post_init__(self):
        if not self.rows or not self.rows[0]:
            raise ValueError("grid must contain at least one cell")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        width = len(self.rows[0])
        if any(len(row) != width for row in self.rows):
            raise ValueError("grid rows must all have the same length")

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def height(self) -> int:
        return len(self.rows)

    @property
    def bounds(self) -> ArenaBounds:
        return ArenaBounds(
            self.x_min,
            self.x_min + self.width * self.cell_size,
            self.y_min,
            self.y_min + self.height * self.cell_size,
        )

    def cell_index(self, x: float, y: float) -> tuple[int, int]:
        """Map a point to (column, row) indices.

        Cell boundaries are lower-left inclusive (floor convention); the
        arena's max edges fold into the last cell so clamped poses stay valid.
        """
        if not self.bounds.contains(x, y):
            raise OutOfBoundsError(f"point ({x}, {y}) outside arena {self.bounds}")
        ix = math.floor((x - self.x_min) / self.cell_size)
        iy = math.floor((y - self.y_min) / self.cell_size)
        return min(ix, self.width - 1), min(iy, self.height - 1)

    def kind_at(self, x: float, y: float) -> CellKind:
        ix, iy = self.cell_index(x, y)
        return self.rows[iy][ix]

    def with_cell(self, x: float, y: float, kind: CellKind) -> "FloorGrid":
        ix, iy = self.cell_index(x, y)
        new_row = tuple(kind if c == ix else cell for c, cell in enumerate(self.rows[iy]))
        new_rows = tuple(new_row if r == iy else row for r, row in enumerate(self.rows))
        return replace(self, rows=new_rows)

    def counts(self) -> dict[CellKind, int]:
        out = {kind: 0 for kind in CellKind}
        for row in self.rows:
            for cell in row:
                out[cell] += 1
        return out

    def to_map_text(self) -> str:
        header = f"{self.width} {self.height} {self.cell_size}"
        body = ["".join(_KIND_TO_CHAR[cell] for cell in row) for row in reversed(self.rows)]
        return "\n".join([header, *body]) + "\n"


def parse_grid_map(text: str, center: tuple[float, float] = (0.0, 0.0)) -> FloorGrid:
    """Parse the plain-text map format described in the module docstring."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ValueError("map line 1: missing header `width height cell_size`")
    fields = lines[0].split()
    if len(fields) != 3:
        raise ValueError("map line 1: header must be `width height cell_size`")
    try:
        width, height = int(fields[0]), int(fields[1])
        cell_size = float(fields[2])
    except ValueError as exc:
        raise ValueError(f"map line 1: bad header value ({exc})") from None
    if width <= 0 or height <= 0 or cell_size <= 0:
        raise ValueError("map line 1: width, height and cell_size must be positive")
    body = lines[1:1 + height]
    if len(body) < height:
        raise ValueError(f"map: expected {height} rows, found {len(body)}")
    top_down = []
    for i, line in enumerate(body):
        row = line.strip()
        if len(row) != width:
            raise ValueError(f"map line {i + 2}: expected {width} cells, found {len(row)}")
        try:
            top_down.append(tuple(_CHAR_TO_KIND[ch] for ch in row))
        except KeyError as exc:
            raise ValueError(f"map line {i + 2}: unknown cell character {exc}") from None
    cx, cy = center
    return FloorGrid(
        cell_size=cell_size,
        rows=tuple(reversed(top_down)),
        x_min=cx - width * cell_size / 2.0,
        y_min=cy - height * cell_size / 2.0,
    )


def load_grid_file(path: str | Path, center: tuple[float, float] = (0.0, 0.0)) -> FloorGrid:
    return parse_grid_map(Path(path).read_text(encoding="utf-8"), center=center)


def generate_grid(width: int, height: int, cell_size: float, crop_fraction: float,
                  seed: int, center: tuple[float, float] = (0.0, 0.0)) -> FloorGrid:
    """Generate a crops/weeds grid with an exact crop count, shuffled by seed.

    An exact count (round(fraction * cells)) keeps the majority ground truth
    unambiguous; fraction 0.5 on an even cell count yields exactly equal counts.
    """
    if not 0.0 <= crop_fraction <= 1.0:
        raise ValueError("crop_fraction must be in [0, 1]")
    total = width * height
    n_crops = round(crop_fraction * total)
    kinds = [CellKind.CROPS] * n_crops + [CellKind.WEEDS] * (total - n_crops)
    random.Random(seed).shuffle(kinds)
    rows = tuple(tuple(kinds[r * width:(r + 1) * width]) for r in range(height))
    cx, cy = center
    return FloorGrid(
        cell_size=cell_size,
        rows=rows,
        x_min=cx - width * cell_size / 2.0,
        y_min=cy - height * cell_size / 2.0,
    )


def sense_floor(grid: FloorGrid, pose: Pose, tick: int) -> SensorReading:
    """Read the cell under the pose; raises OutOfBoundsError for poses outside."""
    return SensorReading(grid.kind_at(pose.x, pose.y), pose.x, pose.y, tick)
