"""A live scenario run on a background thread, exposed to the operator.

One lock serializes simulation steps and operator handlers, so every
operator-driven mutation lands exactly at a tick boundary; snapshots are
plain dict values built under the lock and safe to hand to any thread.
"""

from __future__ import annotations

import queue
import threading
import time
from collections import Counter
from pathlib import Path

from ..agents.parsing import parse_robot_response
from ..errors import SwarmChatError
from ..harness.config import ScenarioConfig
from ..harness.engine import ScenarioEngine
from ..llm.client import ChatClient
from ..llm.types import ChatMessage, CompletionError
from ..messages import Directive

SNAPSHOT_EVERY_TICKS = 10
BROADCAST_EXCERPT_CHARS = 120


class NoDirectiveError(SwarmChatError):
    """No robot turned the operator text into an actionable directive."""


class OperatorBackendError(SwarmChatError):
    """The model backend failed while serving an operator request."""


class LiveRun:
    def __init__(self, run_id: str, config: ScenarioConfig,
                 client: ChatClient | None = None,
                 out_dir: str | Path | None = None,
                 pace: float = 0.0, start_paused: bool = False):
        self.run_id = run_id
        self.engine = ScenarioEngine(config, client=client, out_dir=out_dir)
        self.pace = pace
        self._lock = threading.RLock()
        self._paused = threading.Event()
        if start_paused:
            self._paused.set()
        self._stop = threading.Event()
        self._subscribers: list[queue.Queue] = []
        self._published_records = 0
        self._thread: threading.Thread | None = None

    # -- lifecycle ----------------------------------------------------------

    def start(self):
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, name=f"run-{self.run_id}",
                                        daemon=True)
        self._thread.start()

    def _loop(self):
        while not self._stop.is_set() and not self.engine.finished:
            if self._paused.is_set():
                time.sleep(0.01)
                continue
            with self._lock:
                self.engine.step_tick()
                tick = self.engine.sim.tick
                snap = self._snapshot_locked() if tick % SNAPSHOT_EVERY_TICKS == 0 else None
            self._publish_new_records()
            if snap is not None:
                self._publish({"type": "snapshot", "data": snap})
            if self.pace:
                time.sleep(self.pace)
        with self._lock:
            if self.engine.finished:
                self.engine.finalize()
            snap = self._snapshot_locked()
        self._publish_new_records()
        self._publish({"type": "snapshot", "data": snap})

    def shutdown(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.engine.close()

    def join(self, timeout: float | None = None):
        if self._thread is not None:
            self._thread.join(timeout)

    # -- control ------------------------------------------------------------

    def pause(self) -> bool:
        self._paused.set()
        return True

    def resume(self) -> bool:
        self._paused.clear()
        return True

    @property
    def paused(self) -> bool:
        return self._paused.is_set()

    # -- snapshots and stream -------------------------------------------------

    def snapshot_state(self) -> dict:
        with self._lock:
            return self._snapshot_locked()

    def _snapshot_locked(self) -> dict:
        sim = self.engine.sim
        bounds = sim.grid.bounds
        robots = []
        for robot in sim.robots:
            agent = self.engine.agents[robot.id]
            last = agent.sent[-1].text if agent.sent else None
            if last is not None and len(last) > BROADCAST_EXCERPT_CHARS:
                last = last[:BROADCAST_EXCERPT_CHARS] + "..."
            directive = robot.pending_directive
            robots.append({
                "id": robot.id,
                "x": robot.pose.x, "y": robot.pose.y, "theta": robot.pose.theta,
                "wheels_enabled": robot.wheels_enabled,
                "last_broadcast": last,
                "directive": None if directive is None else {
                    "activity": directive.activity.value,
                    "target": list(directive.target) if directive.target else None,
                },
            })
        kind_chars = {"crops": "c", "weeds": "w", "injured_person": "i"}
        grid_rows = ["".join(kind_chars[cell.value] for cell in row)
                     for row in reversed(sim.grid.rows)]
        counts = sim.grid.counts()
        return {
            "run_id": self.run_id,
            "tick": sim.tick,
            "round_index": self.engine.rounds_done,
            "paused": self.paused,
            "finished": self.engine.finished,
            "radius": self.engine.config.radius,
            "robots": robots,
            "arena": {
                "x_min": bounds.x_min, "x_max": bounds.x_max,
                "y_min": bounds.y_min, "y_max": bounds.y_max,
                "cell_size": sim.grid.cell_size,
                "grid_rows": grid_rows,
                "counts": {k.value: v for k, v in counts.items()},
            },
        }

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        q.put({"type": "snapshot", "data": self.snapshot_state()})
        self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        if q in self._subscribers:
            self._subscribers.remove(q)

    def _publish(self, event: dict):
        for q in list(self._subscribers):
            q.put(event)

    def _publish_new_records(self):
        with self._lock:
            records = self.engine.writer.records[self._published_records:]
            self._published_records = len(self.engine.writer.records)
        for record in records:
            self._publish({"type": "transcript", "data": {
                "seq": record.seq, "tick": record.tick, "kind": record.kind,
                "robot": record.robot, "payload": record.payload}})

    # -- operator channels ----------------------------------------------------

    def handle_inform(self, text: str) -> str:
        """Route the operator's information request through the lowest-id
        responsive robot's conversation."""
        if not text:
            raise ValueError("inform text must be non-empty")
        with self._lock:
            responder = self._pick_responder()
            agent = self.engine.agents[responder]
            messages = [*agent.conversation, ChatMessage("user", text)]
            self.engine._emit("prompt", responder, text)
            try:
                result = self._client().complete_chat(messages)
            except CompletionError as exc:
                self.engine._emit("diagnostic", responder, f"backend error (inform): {exc}")
                raise OperatorBackendError(str(exc)) from exc
            agent.conversation.append(ChatMessage("user", text))
            agent.conversation.append(ChatMessage("assistant", result.text))
            self.engine._emit("response", responder, result.text)
        self._publish_new_records()
        return result.text

    def handle_instruct(self, text: str) -> Directive:
        """Fan the operator text out to every robot; install each robot's parsed
        directive; return the consensus directive."""
        if not text:
            raise ValueError("instruct text must be non-empty")
        with self._lock:
            directives: dict[int, Directive] = {}
            for rid in sorted(self.engine.agents):
                agent = self.engine.agents[rid]
                messages = [*agent.conversation, ChatMessage("user", text)]
                self.engine._emit("prompt", rid, text)
                try:
                    result = self._client().complete_chat(messages)
                except CompletionError as exc:
                    self.engine._emit("diagnostic", rid, f"backend error (instruct): {exc}")
                    continue
                agent.conversation.append(ChatMessage("user", text))
                agent.conversation.append(ChatMessage("assistant", result.text))
                self.engine._emit("response", rid, result.text)
                _, directive, _ = parse_robot_response(result.text)
                if directive is not None:
                    directives[rid] = directive
                    self.engine.install_directive(rid, directive)
            if not directives:
                self._publish_new_records()
                raise NoDirectiveError("no actionable directive in any robot response")
            counts = Counter(directives.values())
            top = max(counts.values())
            winners = {d for d, n in counts.items() if n == top}
            consensus = next(directives[rid] for rid in sorted(directives)
                             if directives[rid] in winners)
        self._publish_new_records()
        return consensus

    def _pick_responder(self) -> int:
        for rid in sorted(self.engine.agents):
            if any(m.role == "assistant" for m in self.engine.agents[rid].conversation):
                return rid
        return min(self.engine.agents)

    def _client(self) -> ChatClient:
        client = self.engine.client
        if client is None:
            raise OperatorBackendError("this run has no model endpoint configured")
        return client
