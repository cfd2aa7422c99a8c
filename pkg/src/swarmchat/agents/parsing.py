"""Parsing free-form model responses into broadcasts, directives and flags."""

from __future__ import annotations

import re

from ..messages import Activity, Directive

_ACTIVITY_RE = re.compile(r"^\s*activity:\s*(.+?)\s*$", re.IGNORECASE)
_TARGET_RE = re.compile(r"^\s*target:\s*\(\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\)\s*$",
                        re.IGNORECASE)

_ACTIVITY_NAMES = {
    "targeted navigation": Activity.TARGETED_NAVIGATION,
    "random walk": Activity.RANDOM_WALK,
    "stop": Activity.STOP,
}

# phrases that mark a response as anomaly-relevant for metric evaluation
ANOMALY_MARKERS = ("issue with movement", "sensor readings", "discrepancy",
                   "injured", "immediate attention")


def _normalize_activity(name: str) -> str:
    return " ".join(name.lower().replace("_", " ").split())


def parse_robot_response(text: str) -> tuple[str, Directive | None, list[str]]:
    """Total parse of a model response.

    Returns (broadcast, directive, anomaly_flags). The broadcast is always the
    full text. ACTIVITY/TARGET lines are matched case-insensitively; an
    unrecognized activity name or a navigation line without a target yields no
    directive but leaves a note in the flags. Flags also collect every line
    containing one of the anomaly marker phrases.
    """
    activity: Activity | None = None
    target: tuple[float, float] | None = None
    flags: list[str] = []
    for line in text.splitlines():
        lowered = line.lower()
        for marker in ANOMALY_MARKERS:
            if marker in lowered:
                flags.append(line.strip())
                break
        match = _ACTIVITY_RE.match(line)
        if match and activity is None:
            name = _normalize_activity(match.group(1))
            if name in _ACTIVITY_NAMES:
                activity = _ACTIVITY_NAMES[name]
            else:
                flags.append(f"unknown activity: {match.group(1).strip()}")
        match = _TARGET_RE.match(line)
        if match and target is None:
            target = (float(match.group(1)), float(match.group(2)))
    directive: Directive | None = None
    if activity is Activity.TARGETED_NAVIGATION:
        if target is None:
            flags.append("targeted navigation without a target")
        else:
            directive = Directive(activity, target)
    elif activity is not None:
        directive = Directive(activity)
    return text, directive, flags
