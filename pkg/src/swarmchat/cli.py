"""Command-line interface: run, metrics, synthesize, serve, report."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .errors import ScenarioError
from .harness.config import load_scenario
from .harness.engine import run_scenario
from .harness.metrics import evaluate_run_dir
from .llm.client import client_from_profile
from .synthesis.pipeline import (aggregation_expectation, run_synthesis_loop,
                                 write_attempts_log)
from .synthesis.prompts import SynthesisRequest


def _cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.endpoint is not None:
        config = config.with_endpoint(args.endpoint)
    client = client_from_profile(config.endpoint, config.base_dir)
    metrics, _ = run_scenario(config, client=client, out_dir=args.out_dir)
    print(f"run complete: {config.name} (seed {config.seed})")
    print(f"  majority: truth={metrics.majority_truth} reported={metrics.majority_reported} "
          f"correct={metrics.majority_correct}")
    if metrics.anomaly_detected:
        detected = ", ".join(f"{k}={v}" for k, v in metrics.anomaly_detected.items())
        print(f"  anomalies detected: {detected}")
    print(f"  rounds: {metrics.rounds_executed}, backend failures: {metrics.failures}")
    print(f"  artifacts in {args.out_dir}")
    return 0


def _cmd_metrics(args) -> int:
    metrics = evaluate_run_dir(args.transcript)
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    return 0


def _load_request(path: Path) -> tuple[SynthesisRequest, dict]:
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or "description" not in data:
        raise ScenarioError(f"{path}: request file needs a 'description' key")
    examples = []
    for entry in data.get("examples", []) or []:
        label = entry.get("label", "example")
        if "file" in entry:
            source = (path.parent / entry["file"]).read_text(encoding="utf-8")
        else:
            source = entry["source"]
        examples.append((label, source))
    kwargs = {}
    if "grammar" in data:
        kwargs["grammar_excerpt"] = (path.parent / data["grammar"]).read_text(encoding="utf-8")
    request = SynthesisRequest(description=data["description"], examples=examples, **kwargs)
    return request, data.get("logic_expectation") or {}


def _cmd_synthesize(args) -> int:
    request_path = Path(args.request)
    request, expectation_raw = _load_request(request_path)
    client = client_from_profile(args.endpoint, request_path.parent)
    if client is None:
        print("synthesize: endpoint 'none' cannot produce programs", file=sys.stderr)
        return 2
    security_client = (client_from_profile(args.security_endpoint, request_path.parent)
                       if args.security_endpoint else None)
    logic_check = None
    if args.logic_scenario:
        scenario = load_scenario(args.logic_scenario)
        expectation = aggregation_expectation(
            settle_tick=int(expectation_raw.get("settle_tick", 150)),
            settle_max=float(expectation_raw.get("settle_max", 0.3)),
            scatter_tick=int(expectation_raw.get("scatter_tick", 400)),
            scatter_min=float(expectation_raw.get("scatter_min", 0.5)))
        logic_check = (scenario, expectation)
    outcome = run_synthesis_loop(request, client, logic_check=logic_check,
                                 max_iterations=args.max_iters,
                                 security_client=security_client)
    if args.attempts_log:
        write_attempts_log(outcome.attempts, args.attempts_log)
    if outcome.accepted:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(outcome.source + "\n", encoding="utf-8")
        print(f"accepted at iteration {outcome.attempts[-1].iteration}; wrote {args.out}")
        return 0
    print(f"synthesis failed: {outcome.failure_reason}", file=sys.stderr)
    for attempt in outcome.attempts:
        print(f"  iteration {attempt.iteration}: stage {attempt.stage_reached}; "
              f"{len(attempt.diagnostics)} finding(s)", file=sys.stderr)
    return 1


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.runner import LiveRun

    config = load_scenario(args.scenario)
    if args.endpoint is not None:
        config = config.with_endpoint(args.endpoint)
    client = client_from_profile(config.endpoint, config.base_dir)
    run = LiveRun(config.name, config, client=client, out_dir=args.out_dir,
                  pace=args.pace, start_paused=args.start_paused)
    run.start()
    app = create_app({config.name: run})
    print(f"serving run {config.name!r} on http://{args.host}:{args.port}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        run.shutdown()
    return 0


def _cmd_report(args) -> int:
    from .report import render_report

    written = render_report(args.transcript, args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmchat",
        description="Robot-swarm simulation with per-robot LLM conversations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario and persist its artifacts")
    p.add_argument("--scenario", required=True)
    p.add_argument("--endpoint", default=None,
                   help="endpoint profile override (oracle, none, scripted:<file>, or a YAML file)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("metrics", help="re-evaluate metrics offline from a transcript")
    p.add_argument("transcript")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("synthesize", help="synthesize a controller through the validation loop")
    p.add_argument("--request", required=True, help="YAML request file")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--security-endpoint", default=None)
    p.add_argument("--max-iters", type=int, default=5)
    p.add_argument("--logic-scenario", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--attempts-log", default=None)
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("serve", help="expose a live run to operators over HTTP")
    p.add_argument("--scenario", required=True)
    p.add_argument("--endpoint", default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--pace", type=float, default=0.1,
                   help="wall-clock seconds per tick (0 runs as fast as possible)")
    p.add_argument("--start-paused", action="store_true")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("report", help="render figures and CSV summaries for a finished run")
    p.add_argument("transcript")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
