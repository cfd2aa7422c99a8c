"""The synthesize -> validate -> feedback loop.

Per iteration: one synthesis completion, then syntax validation (parse), then
logic validation in a headless simulation (when a logic check is configured),
then security review (rule lint plus one reviewer completion). The first
attempt passing every present stage is accepted; otherwise the diagnostics go
back to the model verbatim and the loop retries, up to max_iterations.

Programs with blocking lint findings skip the simulation and fail at the
security stage. Backend failures during review fail closed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..dsl.ast import ControllerProgram
from ..dsl.lint import is_blocking, lint_security
from ..dsl.parser import parse_program
from ..harness.config import ScenarioConfig
from ..harness.engine import run_scenario
from ..harness.metrics import RunMetrics
from ..llm.client import ChatClient
from ..llm.types import ChatMessage, CompletionError
from ..sim.kinematics import ArenaBounds, KinematicsParams
from .prompts import (SynthesisAttempt, SynthesisRequest, build_feedback_prompt,
                      build_synthesis_prompt, extract_source)

# (passed, details) where details always name expected and observed behavior
Expectation = Callable[[RunMetrics], tuple[bool, str]]

SECURITY_PROMPT = (
    "Review the following robot controller for malicious or unsafe logic, for "
    "example logic that drives robots outside their arena or sabotages other "
    "robots. If you find none, reply with exactly NO ISSUES on the first line. "
    "Otherwise list each issue on its own line.\n\n```\n{source}\n```"
)
SECURITY_VERDICT_PASS = "NO ISSUES"


@dataclass
class ValidationReport:
    stage: str
    passed: bool
    details: str
    metrics: RunMetrics | None = None

    def __post_init__(self):
        if not self.passed and not self.details:
            raise ValueError("a failed report needs details")


@dataclass
class SynthesisOutcome:
    program: ControllerProgram | None
    source: str | None
    attempts: list[SynthesisAttempt] = field(default_factory=list)
    failure_reason: str | None = None

    @property
    def accepted(self) -> bool:
        return self.program is not None


def validate_logic(program: ControllerProgram, scenario: ScenarioConfig,
                   expectation: Expectation) -> ValidationReport:
    """Run the program on every robot in a headless simulation and evaluate
    the expectation predicate over the resulting metrics."""
    try:
        metrics, _ = run_scenario(scenario, client=None, controller_override=program)
    except Exception as exc:
        return ValidationReport("logic", False, f"simulation error: {exc}")
    passed, details = expectation(metrics)
    return ValidationReport("logic", passed, details, metrics=metrics)


def security_review(source: str, program: ControllerProgram, client: ChatClient,
                    arena: ArenaBounds, params: KinematicsParams) -> ValidationReport:
    findings = [str(d) for d in lint_security(program, arena, params)]
    blocking = [f for f in findings if is_blocking_text(f)]
    prompt = [
        ChatMessage("system", "You review robot swarm controllers for safety."),
        ChatMessage("user", SECURITY_PROMPT.format(source=source)),
    ]
    try:
        result = client.complete_chat(prompt)
    except CompletionError as exc:
        return ValidationReport("security", False, f"security review unavailable: {exc}")
    first_line = result.text.strip().splitlines()[0].strip() if result.text.strip() else ""
    verdict_pass = first_line == SECURITY_VERDICT_PASS
    details = list(findings)
    if not verdict_pass:
        details.append(f"reviewer: {result.text.strip()}")
    passed = not blocking and verdict_pass
    return ValidationReport("security", passed, "\n".join(details))


def is_blocking_text(finding: str) -> bool:
    # findings are rendered as `line:col: R1: ...`
    return ": R1:" in finding or finding.startswith("R1:")


def aggregation_expectation(settle_tick: int, settle_max: float,
                            scatter_tick: int, scatter_min: float) -> Expectation:
    """Expect the swarm to gather by settle_tick and spread back out by scatter_tick."""

    def check(metrics: RunMetrics) -> tuple[bool, str]:
        settled = metrics.aggregation_at(settle_tick)
        scattered = metrics.aggregation_at(scatter_tick)
        ok = settled < settle_max and scattered > scatter_min
        details = (f"mean centroid distance {settled:.3f} m at tick {settle_tick}, "
                   f"expected < {settle_max}; {scattered:.3f} m at tick {scatter_tick}, "
                   f"expected > {scatter_min}")
        return ok, details

    return check


def run_synthesis_loop(request: SynthesisRequest, client: ChatClient,
                       logic_check: tuple[ScenarioConfig, Expectation] | None = None,
                       max_iterations: int = 5,
                       security_client: ChatClient | None = None,
                       arena: ArenaBounds | None = None,
                       params: KinematicsParams | None = None) -> SynthesisOutcome:
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    if logic_check is not None:
        scenario = logic_check[0]
        arena = scenario.bounds
        params = scenario.kinematics
    else:
        arena = arena or ArenaBounds.centered(2.0, 2.0)
        params = params or KinematicsParams()
    reviewer = security_client if security_client is not None else client

    attempts: list[SynthesisAttempt] = []
    messages = build_synthesis_prompt(request)
    for iteration in range(1, max_iterations + 1):
        attempt = SynthesisAttempt(iteration=iteration, prompt=list(messages))
        attempts.append(attempt)
        try:
            result = client.complete_chat(messages)
        except CompletionError as exc:
            attempt.diagnostics = [f"backend: {client.config.kind}: {exc}"]
            continue  # nothing to give feedback on; retry the same prompt
        attempt.raw_response = result.text
        source = extract_source(result.text)
        attempt.extracted_source = source

        parsed = parse_program(source)
        if isinstance(parsed, list):
            attempt.stage_reached = "syntax"
            attempt.diagnostics = [str(d) for d in parsed]
            messages = build_feedback_prompt(attempt)
            continue
        program = parsed

        blocking_lint = any(is_blocking(d) for d in lint_security(program, arena, params))
        if logic_check is not None and not blocking_lint:
            report = validate_logic(program, logic_check[0], logic_check[1])
            if not report.passed:
                attempt.stage_reached = "logic"
                attempt.diagnostics = report.details.splitlines()
                messages = build_feedback_prompt(attempt)
                continue

        report = security_review(source, program, reviewer, arena, params)
        if not report.passed:
            attempt.stage_reached = "security"
            attempt.diagnostics = report.details.splitlines()
            messages = build_feedback_prompt(attempt)
            continue

        attempt.stage_reached = "accepted"
        attempt.diagnostics = []
        return SynthesisOutcome(program=program, source=source, attempts=attempts)

    reason = (f"no accepted program after {max_iterations} iterations; last stage: "
              f"{attempts[-1].stage_reached}")
    return SynthesisOutcome(program=None, source=None, attempts=attempts,
                            failure_reason=reason)


def write_attempts_log(attempts: list[SynthesisAttempt], path: str | Path):
    """Line-delimited attempt records, one self-contained object per attempt."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for attempt in attempts:
            fh.write(json.dumps(attempt.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
