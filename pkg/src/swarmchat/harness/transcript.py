"""Line-delimited transcript persistence (crash-safe incremental append)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

RECORD_KINDS = ("prompt", "response", "broadcast", "directive", "anomaly", "diagnostic")


@dataclass(frozen=True)
class TranscriptRecord:
    seq: int
    tick: int
    kind: str
    robot: int | None
    payload: str

    def __post_init__(self):
        if self.kind not in RECORD_KINDS:
            raise ValueError(f"kind must be one of {RECORD_KINDS}, got {self.kind!r}")

    def to_json(self) -> str:
        return json.dumps(
            {"seq": self.seq, "tick": self.tick, "kind": self.kind,
             "robot": self.robot, "payload": self.payload},
            sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> "TranscriptRecord":
        data = json.loads(line)
        return cls(seq=data["seq"], tick=data["tick"], kind=data["kind"],
                   robot=data.get("robot"), payload=data["payload"])


class TranscriptWriter:
    """Collects records in memory and, when given a path, appends each record
    to the file as soon as it is emitted."""

    def __init__(self, path: str | Path | None = None):
        self.records: list[TranscriptRecord] = []
        self.path = Path(path) if path is not None else None
        self._fh: IO[str] | None = None
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = self.path.open("w", encoding="utf-8")

    def emit(self, tick: int, kind: str, robot: int | None, payload: str) -> TranscriptRecord:
        record = TranscriptRecord(seq=len(self.records), tick=tick, kind=kind,
                                  robot=robot, payload=payload)
        self.records.append(record)
        if self._fh is not None:
            self._fh.write(record.to_json() + "\n")
            self._fh.flush()
        return record

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_transcript(path: str | Path) -> list[TranscriptRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(TranscriptRecord.from_json(line))
    return records
