"""Inter-robot broadcasts and structured directives parsed from model output."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Activity(str, Enum):
    TARGETED_NAVIGATION = "targeted_navigation"
    RANDOM_WALK = "random_walk"
    STOP = "stop"


@dataclass(frozen=True)
class BroadcastMessage:
    """One free-text message exchanged during a discussion round."""

    sender: int
    round: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("broadcast text must be non-empty")


@dataclass(frozen=True)
class Directive:
    """Structured action extracted from model text; overrides the controller until done."""

    activity: Activity
    target: tuple[float, float] | None = None

    def __post_init__(self):
        if self.activity is Activity.TARGETED_NAVIGATION and self.target is None:
            raise ValueError("targeted_navigation requires a target")
