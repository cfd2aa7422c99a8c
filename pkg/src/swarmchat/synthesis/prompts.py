"""Prompt construction and response extraction for controller synthesis."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..harness.config import data_path
from ..llm.types import ChatMessage

_FENCE_RE = re.compile(r"```[A-Za-z0-9_.-]*\n(.*?)```", re.DOTALL)

SYSTEM_RULES = (
    "You write controllers for differential-drive swarm robots in a small "
    "state-machine language with the .swarmctl file extension.\n\n"
    "Grammar:\n{grammar}\n\n"
    "Respond with exactly one fenced code block containing a .swarmctl program. "
    "No prose outside the code block."
)


def default_grammar() -> str:
    return data_path("grammar.txt").read_text(encoding="utf-8").strip()


@dataclass
class SynthesisRequest:
    """What the controller should do, plus few-shot examples."""

    description: str
    examples: list[tuple[str, str]] = field(default_factory=list)  # (label, source)
    grammar_excerpt: str = field(default_factory=default_grammar)

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError("description must be non-empty")


@dataclass
class SynthesisAttempt:
    iteration: int
    prompt: list[ChatMessage]
    raw_response: str = ""
    extracted_source: str = ""
    stage_reached: str = "syntax"  # syntax | logic | security | accepted
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "prompt": [{"role": m.role, "content": m.content} for m in self.prompt],
            "raw_response": self.raw_response,
            "extracted_source": self.extracted_source,
            "stage_reached": self.stage_reached,
            "diagnostics": list(self.diagnostics),
        }


def build_synthesis_prompt(request: SynthesisRequest) -> list[ChatMessage]:
    system = SYSTEM_RULES.format(grammar=request.grammar_excerpt)
    parts = [f"Desired controller: {request.description.strip()}"]
    for label, source in request.examples:
        parts.append(f"Example ({label}):\n```\n{source.strip()}\n```")
    return [ChatMessage("system", system), ChatMessage("user", "\n\n".join(parts))]


def extract_source(raw_response: str) -> str:
    """Content of the first fenced code block, or the whole response trimmed."""
    match = _FENCE_RE.search(raw_response)
    if match:
        return match.group(1).strip()
    return raw_response.strip()


def build_feedback_prompt(previous: SynthesisAttempt) -> list[ChatMessage]:
    """Extend the previous conversation with the diagnostics, verbatim, and the
    request to return a corrected full program."""
    if previous.stage_reached == "accepted":
        raise ValueError("no feedback needed for an accepted attempt")
    messages = list(previous.prompt)
    if previous.raw_response:
        messages.append(ChatMessage("assistant", previous.raw_response))
    lines = [f"The program failed {previous.stage_reached} validation with the "
             "following findings:"]
    lines.extend(previous.diagnostics)
    lines.append("")
    lines.append("Please remove or correct the issues and respond with the complete "
                 "corrected program in one fenced code block.")
    messages.append(ChatMessage("user", "\n".join(lines)))
    return messages
