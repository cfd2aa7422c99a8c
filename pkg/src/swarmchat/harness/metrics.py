"""Quantitative outcomes of a run, recomputable offline from persisted files."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..sim.grid import CellKind, FloorGrid
from .transcript import TranscriptRecord

MAJORITY_PHRASES = ("more crops", "more weeds", "equal")

# marker phrases that count as detection evidence, per anomaly kind
ANOMALY_MARKERS = {
    "disable_wheels_all": ("issue with movement",),
    "sensor_stuck": ("discrepancy",),
    "place_injured": ("injured",),
}

PoseRow = tuple[int, list[tuple[int, float, float, float]]]  # tick, [(id, x, y, theta)]


@dataclass
class RunMetrics:
    majority_truth: str
    majority_reported: str | None
    majority_correct: bool
    anomaly_detected: dict[str, bool] = field(default_factory=dict)
    aggregation: list[tuple[int, float]] = field(default_factory=list)
    rounds_executed: int = 0
    failures: int = 0

    def aggregation_at(self, tick: int) -> float:
        for t, value in self.aggregation:
            if t == tick:
                return value
        raise KeyError(f"no aggregation sample at tick {tick}")

    def to_dict(self) -> dict:
        return {
            "majority_truth": self.majority_truth,
            "majority_reported": self.majority_reported,
            "majority_correct": self.majority_correct,
            "anomaly_detected": self.anomaly_detected,
            "aggregation": [[t, d] for t, d in self.aggregation],
            "rounds_executed": self.rounds_executed,
            "failures": self.failures,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunMetrics":
        return cls(
            majority_truth=data["majority_truth"],
            majority_reported=data.get("majority_reported"),
            majority_correct=data["majority_correct"],
            anomaly_detected=dict(data.get("anomaly_detected", {})),
            aggregation=[(int(t), float(d)) for t, d in data.get("aggregation", [])],
            rounds_executed=data.get("rounds_executed", 0),
            failures=data.get("failures", 0),
        )


def count_crops_weeds(grid: FloorGrid) -> tuple[int, int]:
    """Plain double-loop recount; the definition of the majority ground truth."""
    crops = weeds = 0
    for row in grid.rows:
        for cell in row:
            if cell is CellKind.CROPS:
                crops += 1
            elif cell is CellKind.WEEDS:
                weeds += 1
    return crops, weeds


def majority_of_counts(crops: int, weeds: int) -> str:
    if crops > weeds:
        return "crops"
    if weeds > crops:
        return "weeds"
    return "equal"


def majority_phrase_of(text: str) -> str | None:
    """The majority phrase appearing last in the text, if any."""
    best: tuple[int, str] | None = None
    lowered = text.lower()
    for phrase in MAJORITY_PHRASES:
        idx = lowered.rfind(phrase)
        if idx >= 0 and (best is None or idx > best[0]):
            best = (idx, phrase)
    if best is None:
        return None
    return {"more crops": "crops", "more weeds": "weeds", "equal": "equal"}[best[1]]


def _broadcast_texts(records: Iterable[TranscriptRecord]) -> list[str]:
    texts = []
    for record in records:
        if record.kind == "broadcast":
            texts.append(json.loads(record.payload)["text"])
    return texts


def aggregation_series(pose_history: Sequence[PoseRow]) -> list[tuple[int, float]]:
    series = []
    for tick, poses in pose_history:
        n = len(poses)
        cx = sum(p[1] for p in poses) / n
        cy = sum(p[2] for p in poses) / n
        mean_dist = sum(math.hypot(p[1] - cx, p[2] - cy) for p in poses) / n
        series.append((tick, mean_dist))
    return series


def evaluate_records(grid_crops: int, grid_weeds: int,
                     records: Sequence[TranscriptRecord],
                     anomaly_kinds: Sequence[str],
                     pose_history: Sequence[PoseRow]) -> RunMetrics:
    truth = majority_of_counts(grid_crops, grid_weeds)
    reported: str | None = None
    broadcasts = _broadcast_texts(records)
    for text in broadcasts:
        phrase = majority_phrase_of(text)
        if phrase is not None:
            reported = phrase
    detected = {}
    for kind in anomaly_kinds:
        markers = ANOMALY_MARKERS[kind]
        detected[kind] = any(
            any(marker in text.lower() for marker in markers) for text in broadcasts)
    rounds_executed = len({r.tick for r in records if r.kind == "prompt"})
    failures = sum(1 for r in records
                   if r.kind == "diagnostic" and r.payload.startswith("backend error"))
    return RunMetrics(
        majority_truth=truth,
        majority_reported=reported,
        majority_correct=reported == truth,
        anomaly_detected=detected,
        aggregation=aggregation_series(pose_history),
        rounds_executed=rounds_executed,
        failures=failures,
    )


def evaluate_metrics(sim, records: Sequence[TranscriptRecord], config,
                     pose_history: Sequence[PoseRow]) -> RunMetrics:
    """Post-run evaluation against the final world state."""
    crops, weeds = count_crops_weeds(sim.grid)
    return evaluate_records(crops, weeds, records, config.anomaly_kinds, pose_history)


def read_pose_history(path) -> list[PoseRow]:
    from pathlib import Path

    history: list[PoseRow] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        history.append((data["tick"],
                        [(int(p[0]), float(p[1]), float(p[2]), float(p[3]))
                         for p in data["poses"]]))
    return history


def evaluate_run_dir(transcript_path) -> RunMetrics:
    """Re-evaluate metrics offline from a transcript and its sibling files
    (poses.jsonl and run_config.json in the same directory)."""
    from pathlib import Path

    from .transcript import read_transcript

    transcript_path = Path(transcript_path)
    run_dir = transcript_path.parent
    records = read_transcript(transcript_path)
    config_path = run_dir / "run_config.json"
    if not config_path.exists():
        raise FileNotFoundError(f"missing run_config.json next to {transcript_path}")
    snapshot = json.loads(config_path.read_text(encoding="utf-8"))
    # independent recount from the persisted rows, not the stored counts
    crops = sum(row.count("c") for row in snapshot["grid_rows"])
    weeds = sum(row.count("w") for row in snapshot["grid_rows"])
    poses_path = run_dir / "poses.jsonl"
    pose_history = read_pose_history(poses_path) if poses_path.exists() else []
    return evaluate_records(crops, weeds, records, snapshot.get("anomaly_kinds", []),
                            pose_history)
