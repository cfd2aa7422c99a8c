"""Canonical pretty-printer; parse(render(p)) is structurally identical to p."""

from __future__ import annotations

from .ast import (Action, AfterGuard, AtTargetGuard, ControllerProgram, Goto,
                  Guard, RandomWalk, Stop)


def _number(value: float) -> str:
    # repr gives the shortest decimal that round-trips exactly
    return repr(float(value))


def _action(action: Action) -> str:
    if isinstance(action, RandomWalk):
        return "random_walk"
    if isinstance(action, Stop):
        return "stop"
    if isinstance(action, Goto):
        return f"goto({_number(action.x)}, {_number(action.y)})"
    raise TypeError(f"unknown action {action!r}")


def _guard(guard: Guard) -> str:
    if isinstance(guard, AfterGuard):
        return f"after {guard.ticks} ticks"
    if isinstance(guard, AtTargetGuard):
        return f"at_target({_number(guard.tolerance)})"
    raise TypeError(f"unknown guard {guard!r}")


def render_program(program: ControllerProgram) -> str:
    lines: list[str] = []
    for state in program.states:
        lines.append(f"state {state.name} {{")
        lines.append(f"    {_action(state.action)}")
        for tr in state.transitions:
            lines.append(f"    {_guard(tr.guard)} -> {tr.target}")
        lines.append("}")
    return "\n".join(lines) + "\n"
