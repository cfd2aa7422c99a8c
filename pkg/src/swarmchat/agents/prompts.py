"""Prompt assembly for the per-robot conversations.

Template files hold two sections separated by a line of `---`: the system
message (placeholder {{robot_id}}) and the per-round user message
(placeholders {{sensor_tuples}} and {{message_history}}). Empty sensor or
history sections render as the literal `[]`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TYPE_CHECKING

from ..llm.types import ChatMessage
from ..messages import BroadcastMessage
from ..sim.grid import SensorReading

if TYPE_CHECKING:
    from ..sim.world import RobotState

SECTION_SEPARATOR = "---"
DEFAULT_HISTORY_ROUNDS = 3


@dataclass(frozen=True)
class PromptTemplate:
    system: str
    user: str

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        parts: list[list[str]] = [[]]
        for line in text.splitlines():
            if line.strip() == SECTION_SEPARATOR:
                parts.append([])
            else:
                parts[-1].append(line)
        if len(parts) != 2:
            raise ValueError("prompt template needs exactly two sections separated by ---")
        return cls("\n".join(parts[0]).strip(), "\n".join(parts[1]).strip())

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


@dataclass
class RobotAgentState:
    """Per-robot conversation (persistent across rounds) and outbound log."""

    robot_id: int
    conversation: list[ChatMessage] = field(default_factory=list)
    sent: list[BroadcastMessage] = field(default_factory=list)


def render_sensor_tuples(readings: Iterable[SensorReading]) -> str:
    items = [f"({r.kind.value}, {r.x:.2f}, {r.y:.2f})" for r in readings]
    if not items:
        return "[]"
    return "[" + ", ".join(items) + "]"


def render_message_history(entries: list[BroadcastMessage], current_round: int,
                           keep_rounds: int = DEFAULT_HISTORY_ROUNDS) -> str:
    """Most recent `keep_rounds` rounds of sent+received messages, oldest first."""
    if not entries:
        return "[]"
    kept = [e for e in entries if e.round > current_round - keep_rounds]
    lines = []
    if len(kept) < len(entries):
        lines.append("(earlier rounds omitted)")
    lines.extend(f"[round {e.round}] Robot {e.sender}: {e.text}" for e in kept)
    return "\n" + "\n".join(lines)


def combined_history(robot: "RobotState", agent: RobotAgentState) -> list[BroadcastMessage]:
    """Sent and received messages merged in arrival order (round, then sender id)."""
    return sorted([*robot.inbox, *agent.sent], key=lambda m: (m.round, m.sender))


def build_robot_prompt(robot: "RobotState", agent: RobotAgentState,
                       template: PromptTemplate, round_index: int,
                       keep_rounds: int = DEFAULT_HISTORY_ROUNDS) -> list[ChatMessage]:
    """Render the next user message, append it to the conversation, return the
    full message list to send."""
    if not agent.conversation:
        system = template.system.replace("{{robot_id}}", str(robot.id))
        agent.conversation.append(ChatMessage("system", system))
    user = template.user.replace("{{sensor_tuples}}", render_sensor_tuples(robot.sensor_log))
    history = render_message_history(combined_history(robot, agent), round_index, keep_rounds)
    user = user.replace("{{message_history}}", history)
    agent.conversation.append(ChatMessage("user", user))
    return list(agent.conversation)
