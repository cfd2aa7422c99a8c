"""Rule-based security lint for parsed controllers.

R1 (blocking in the synthesis pipeline): a goto target outside the arena.
R2 (advisory): a state that is neither initial nor reachable via transitions,
i.e. potential dead or hidden logic. A state with no transitions is fine.
An empty result means "no rule-based findings", not "safe".
"""

from __future__ import annotations

from ..sim.kinematics import ArenaBounds, KinematicsParams
from .ast import ControllerProgram, Diagnostic, Goto

BLOCKING_PREFIX = "R1"


def is_blocking(diagnostic: Diagnostic) -> bool:
    return diagnostic.message.startswith(BLOCKING_PREFIX)


def lint_security(program: ControllerProgram, arena: ArenaBounds,
                  params: KinematicsParams) -> list[Diagnostic]:
    findings: list[Diagnostic] = []
    for state in program.states:
        action = state.action
        if isinstance(action, Goto) and not arena.contains(action.x, action.y):
            findings.append(Diagnostic(
                state.line, state.col,
                f"R1: goto target ({action.x}, {action.y}) in state '{state.name}' is outside "
                f"the arena x [{arena.x_min}, {arena.x_max}], y [{arena.y_min}, {arena.y_max}]"))
    reachable = {program.initial}
    frontier = [program.initial]
    state_map = program.state_map
    while frontier:
        for tr in state_map[frontier.pop()].transitions:
            if tr.target not in reachable:
                reachable.add(tr.target)
                frontier.append(tr.target)
    for state in program.states:
        if state.name not in reachable:
            findings.append(Diagnostic(
                state.line, state.col,
                f"R2: state '{state.name}' is unreachable (potential dead or hidden logic)"))
    return findings
