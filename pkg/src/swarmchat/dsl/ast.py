"""AST for the controller language.

Source positions are carried for diagnostics but excluded from structural
equality, so a parsed program compares equal to a hand-built one.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class RandomWalk:
    pass


@dataclass(frozen=True)
class Goto:
    x: float
    y: float


@dataclass(frozen=True)
class Stop:
    pass


Action = RandomWalk | Goto | Stop


@dataclass(frozen=True)
class AfterGuard:
    """Fires once the robot has spent `ticks` ticks in the current state."""

    ticks: int


@dataclass(frozen=True)
class AtTargetGuard:
    """Fires when the robot is within `tolerance` meters of the state's goto target."""

    tolerance: float


Guard = AfterGuard | AtTargetGuard


@dataclass(frozen=True)
class Transition:
    guard: Guard
    target: str
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class StateDef:
    name: str
    action: Action
    transitions: tuple[Transition, ...] = ()
    line: int = field(default=1, compare=False)
    col: int = field(default=1, compare=False)


@dataclass(frozen=True)
class ControllerProgram:
    states: tuple[StateDef, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError("a program needs at least one state")

    @property
    def initial(self) -> str:
        return self.states[0].name

    @property
    def state_map(self) -> dict[str, StateDef]:
        return {s.name: s for s in self.states}


@dataclass(frozen=True)
class Diagnostic:
    """A positioned problem report; printed as `line:col: message`."""

    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"
