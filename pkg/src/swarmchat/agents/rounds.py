"""Discussion rounds: prompt every robot, complete, parse, deliver, install.

A round is a barrier: the simulation does not tick while requests are in
flight. Scripted and oracle backends are called sequentially in ascending
robot id (the scripted pop-order contract); remote and local backends get one
concurrent in-flight request per robot. All state mutation happens after the
barrier, in ascending robot id order. A failed request delivers nothing, its
unanswered user turn is dropped (keeping the conversation alternating), and a
diagnostic is logged.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import TYPE_CHECKING

from ..llm.client import ChatClient
from ..llm.types import ChatMessage, CompletionError, CompletionResult
from ..messages import BroadcastMessage
from ..sim.world import SimState, neighbors_within_radius
from .parsing import parse_robot_response
from .prompts import PromptTemplate, RobotAgentState, build_robot_prompt

if TYPE_CHECKING:
    from ..harness.config import ScenarioConfig

# (kind, robot id or None, payload) tuples, ready for the transcript
RoundRecord = tuple[str, int | None, str]


def run_discussion_round(sim: SimState, agents: dict[int, RobotAgentState],
                         scenario: "ScenarioConfig", client: ChatClient,
                         round_index: int, template: PromptTemplate
                         ) -> tuple[SimState, list[RoundRecord]]:
    records: list[RoundRecord] = []
    prompts: dict[int, list[ChatMessage]] = {}
    for robot in sim.robots:
        agent = agents[robot.id]
        prompts[robot.id] = build_robot_prompt(robot, agent, template, round_index,
                                               scenario.history_rounds)
        records.append(("prompt", robot.id, prompts[robot.id][-1].content))

    results: dict[int, CompletionResult | CompletionError] = {}
    ordered_ids = sorted(prompts)
    if client.config.kind in ("scripted", "oracle"):
        for rid in ordered_ids:
            try:
                results[rid] = client.complete_chat(prompts[rid])
            except CompletionError as exc:
                results[rid] = exc
    else:
        with ThreadPoolExecutor(max_workers=len(ordered_ids)) as pool:
            futures = {rid: pool.submit(client.complete_chat, prompts[rid])
                       for rid in ordered_ids}
            for rid in ordered_ids:
                try:
                    results[rid] = futures[rid].result()
                except CompletionError as exc:
                    results[rid] = exc

    robots_by_id = {r.id: r for r in sim.robots}
    for rid in ordered_ids:
        agent = agents[rid]
        outcome = results[rid]
        if isinstance(outcome, CompletionError):
            agent.conversation.pop()  # drop the unanswered user turn
            records.append(("diagnostic", rid, f"backend error ({client.config.kind}): {outcome}"))
            continue
        text = outcome.text
        agent.conversation.append(ChatMessage("assistant", text))
        records.append(("response", rid, text))
        broadcast_text, directive, _flags = parse_robot_response(text)
        message = BroadcastMessage(sender=rid, round=round_index, text=broadcast_text)
        agent.sent.append(message)
        recipients = neighbors_within_radius(sim, rid, scenario.radius)
        for neighbor_id in recipients:
            neighbor = robots_by_id[neighbor_id]
            robots_by_id[neighbor_id] = replace(neighbor, inbox=neighbor.inbox + (message,))
        records.append(("broadcast", rid, json.dumps(
            {"recipients": recipients, "round": round_index, "text": broadcast_text},
            sort_keys=True, ensure_ascii=False)))
        if directive is not None:
            robots_by_id[rid] = replace(robots_by_id[rid], pending_directive=directive)
            records.append(("directive", rid, json.dumps(
                {"activity": directive.activity.value, "target": directive.target},
                sort_keys=True)))
    new_sim = replace(sim, robots=tuple(robots_by_id[rid] for rid in sorted(robots_by_id)))
    return new_sim, records
