"""Deterministic rule-based stand-in for an ideal model.

The oracle computes answers from prompt content so scenario behavior is fully
reproducible without a live model. Rules run in a fixed priority order and
exactly one fires per call:

  0. controller security review (prompt carries the NO ISSUES convention)
  1. any injured_person tuple -> report the injured coordinates
  2. three or more consecutive own readings at one position -> movement issue
  3. a peer reporting only weeds while others report crops -> discrepancy
  4. operator instruction containing a coordinate -> ACTIVITY/TARGET lines
  4b. operator information request -> swarm state summary
  5. otherwise the majority statement over own readings plus peer counts

Rule 5 embeds the robot's own cumulative counts ("observed N crops and M
weeds") so peers can run rule 3 against the message history.
"""

from __future__ import annotations

import re

from .types import ChatMessage

SENSOR_HEADER = "Your current array of sensor readings"
HISTORY_HEADER = "History of inter-robot messages"
REVIEW_VERDICT = "NO ISSUES"

# sensor tuples are rendered with two decimals, e.g. (crops, 0.10, -0.23)
_TUPLE_RE = re.compile(r"\((crops|weeds|injured_person),\s*(-?\d+\.\d{2}),\s*(-?\d+\.\d{2})\)")
_COUNTS_RE = re.compile(r"observed (\d+) crops and (\d+) weeds", re.IGNORECASE)
_SENDER_RE = re.compile(r"Robot (\d+): (.*)")
_COORD_RE = re.compile(r"\(\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\)")
_OWN_ID_RE = re.compile(r"robot (\d+)", re.IGNORECASE)

_INFORM_MARKERS = ("communication request", "current state of the swarm",
                   "provide the following information")
_ANOMALY_NOTES = ("issue with movement", "discrepancy", "injured")


def oracle_policy(messages: list[ChatMessage]) -> str:
    last_user = next((m for m in reversed(messages) if m.role == "user"), None)
    if last_user is None:
        return _majority_text(0, 0, 0, 0)
    text = last_user.content

    if REVIEW_VERDICT in text and "```" in text:
        return REVIEW_VERDICT

    own_id = _own_robot_id(messages)
    own_section, history_section = _split_sections(text)
    own_tuples = _TUPLE_RE.findall(own_section)
    all_tuples = _TUPLE_RE.findall(text)

    injured = []
    for kind, x, y in all_tuples:
        if kind == "injured_person" and (x, y) not in injured:
            injured.append((x, y))
    if injured:
        pairs = ", ".join(f"({x}, {y})" for x, y in injured)
        return ("There are detections of an injured person in the environment. "
                "This is unusual and needs immediate attention from the human operator. "
                f"The injured persons are located at coordinates {pairs}.")

    repeated = _repeated_position(own_tuples)
    if repeated is not None:
        x, y = repeated
        return (f"The current position repeatedly observed is ({x}, {y}). "
                "This might indicate a potential issue with movement or sensor readings.")

    peer_counts = _latest_counts(history_section, exclude=own_id)
    own_crops = sum(1 for kind, _, _ in own_tuples if kind == "crops")
    own_weeds = sum(1 for kind, _, _ in own_tuples if kind == "weeds")
    suspect = _weeds_only_peer(peer_counts, own_crops)
    if suspect is not None:
        return (f"Robot {suspect} has reported only weeds, which is unusual given the crop "
                "observations from the other robots. This discrepancy should be "
                "investigated further.")

    if SENSOR_HEADER not in text:
        coord = _COORD_RE.search(text)
        if coord is not None:
            return f"ACTIVITY: TARGETED NAVIGATION\nTARGET: ({coord.group(1)}, {coord.group(2)})"
        lowered = text.lower()
        if any(marker in lowered for marker in _INFORM_MARKERS):
            return _inform_summary(messages, own_id)

    total_crops = own_crops + sum(c for c, _ in peer_counts.values())
    total_weeds = own_weeds + sum(w for _, w in peer_counts.values())
    return _majority_text(own_crops, own_weeds, total_crops, total_weeds)


def _own_robot_id(messages: list[ChatMessage]) -> int | None:
    for message in messages:
        if message.role == "system":
            match = _OWN_ID_RE.search(message.content)
            if match:
                return int(match.group(1))
    return None


def _split_sections(text: str) -> tuple[str, str]:
    if SENSOR_HEADER not in text:
        return "", ""
    idx = text.find(HISTORY_HEADER)
    if idx < 0:
        return text, ""
    return text[:idx], text[idx:]


def _repeated_position(own_tuples: list[tuple[str, str, str]]) -> tuple[str, str] | None:
    run = 1
    for prev, cur in zip(own_tuples, own_tuples[1:]):
        if cur[1:] == prev[1:]:
            run += 1
            if run >= 3:
                return cur[1], cur[2]
        else:
            run = 1
    return None


def _latest_counts(history_section: str, exclude: int | None) -> dict[int, tuple[int, int]]:
    """Most recent cumulative (crops, weeds) per peer, parsed from history lines."""
    latest: dict[int, tuple[int, int]] = {}
    for sender_text, body in _SENDER_RE.findall(history_section):
        sender = int(sender_text)
        if exclude is not None and sender == exclude:
            continue
        match = _COUNTS_RE.search(body)
        if match:
            latest[sender] = (int(match.group(1)), int(match.group(2)))
    return latest


def _weeds_only_peer(peer_counts: dict[int, tuple[int, int]], own_crops: int) -> int | None:
    suspects = sorted(s for s, (c, w) in peer_counts.items() if c == 0 and w > 0)
    for suspect in suspects:
        others_saw_crops = own_crops > 0 or any(
            c > 0 for s, (c, _) in peer_counts.items() if s != suspect)
        if others_saw_crops:
            return suspect
    return None


def _majority_text(own_crops: int, own_weeds: int, total_crops: int, total_weeds: int) -> str:
    lead = f"So far I observed {own_crops} crops and {own_weeds} weeds."
    if total_crops > total_weeds:
        tail = ("Based on the combined observations, it appears that there are "
                "more crops than weeds in the environment.")
    elif total_weeds > total_crops:
        tail = ("Based on the combined observations, it appears that there are "
                "more weeds than crops in the environment.")
    else:
        tail = ("Based on the combined observations, crops and weeds appear "
                "equal in the environment.")
    return f"{lead} {tail}"


def _inform_summary(messages: list[ChatMessage], own_id: int | None) -> str:
    rounds = sum(1 for m in messages if m.role == "assistant")
    latest: dict[int, tuple[int, int]] = {}
    roster: set[int] = set()
    notes: list[str] = []
    for message in messages:
        if message.role == "user":
            for sender_text, body in _SENDER_RE.findall(message.content):
                sender = int(sender_text)
                roster.add(sender)
                match = _COUNTS_RE.search(body)
                if match:
                    latest[sender] = (int(match.group(1)), int(match.group(2)))
        elif message.role == "assistant" and own_id is not None:
            match = _COUNTS_RE.search(message.content)
            if match:
                latest[own_id] = (int(match.group(1)), int(match.group(2)))
        lowered = message.content.lower()
        for marker in _ANOMALY_NOTES:
            if marker in lowered and marker not in notes:
                notes.append(marker)
    if own_id is not None:
        roster.add(own_id)

    lines = ["Current State of the Swarm"]
    for rid in sorted(roster):
        counts = latest.get(rid)
        detail = f" ({counts[0]} crops, {counts[1]} weeds reported)" if counts else ""
        lines.append(f"- Robot {rid}: actively collecting crop and weed observations{detail}.")
    lines += [
        "",
        "Collective Activities Being Performed",
        "- Data collection: identifying crops and weeds at the sensed positions.",
        "- Data sharing: exchanging observations in periodic discussion rounds.",
        "",
        "Intermediate Results",
    ]
    total_crops = sum(c for c, _ in latest.values())
    total_weeds = sum(w for _, w in latest.values())
    if total_crops == total_weeds == 0:
        lines.append("- No observations reported yet.")
    elif total_crops > total_weeds:
        lines.append("- The data indicates more crops than weeds so far.")
    elif total_weeds > total_crops:
        lines.append("- The data indicates more weeds than crops so far.")
    else:
        lines.append("- Crops and weeds appear equal so far.")
    lines += ["", "Encountered Problems or Anomalies"]
    if notes:
        lines += [f"- Reports mention: {note}." for note in notes]
    else:
        lines.append("- None reported.")
    lines += ["", f"Discussion rounds completed: {rounds}."]
    return "\n".join(lines)
