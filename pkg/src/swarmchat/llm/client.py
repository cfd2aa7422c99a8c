"""Chat-completion client over the four backend kinds.

Remote speaks the OpenAI chat-completions wire format
(POST {base_url}/chat/completions with a bearer token); local speaks the
Ollama chat endpoint (POST {base_url}/api/chat). Scripted pops canned
responses under a lock so pop order equals request-issue order; oracle
delegates to the rule engine. One retry on transient network errors, none on
timeouts, so a discussion round has a bounded duration.
"""

from __future__ import annotations

import os
import threading
import time
from pathlib import Path

import requests

from .oracle import oracle_policy
from .types import (ChatMessage, CompletionResult, CompletionTimeout,
                    EndpointConfig, HttpStatusError, NetworkFailure,
                    ScriptExhausted)

SCRIPT_SEPARATOR = "---"


class ChatClient:
    """Holds one endpoint's configuration plus scripted-playback state."""

    def __init__(self, config: EndpointConfig):
        self.config = config
        self._lock = threading.Lock()
        self._script_pos = 0

    def complete_chat(self, messages: list[ChatMessage]) -> CompletionResult:
        if not messages:
            raise ValueError("messages must be non-empty")
        start = time.perf_counter()
        truncated = False
        kind = self.config.kind
        if kind == "scripted":
            text = self._next_script_entry()
        elif kind == "oracle":
            text = oracle_policy(messages)
        else:
            text, truncated = self._http_chat(messages)
        return CompletionResult(text=text, latency=time.perf_counter() - start,
                                backend=kind, truncated=truncated)

    def reset_script(self):
        with self._lock:
            self._script_pos = 0

    def _next_script_entry(self) -> str:
        with self._lock:
            if self._script_pos >= len(self.config.script):
                raise ScriptExhausted(
                    f"script exhausted after {len(self.config.script)} responses")
            text = self.config.script[self._script_pos]
            self._script_pos += 1
            return text

    def _http_chat(self, messages: list[ChatMessage]) -> tuple[str, bool]:
        cfg = self.config
        wire_messages = [{"role": m.role, "content": m.content} for m in messages]
        headers = {}
        if cfg.kind == "remote":
            key = os.environ.get(cfg.api_key_env or "", "")
            if not key:
                raise NetworkFailure(
                    f"api key environment variable {cfg.api_key_env!r} is not set")
            url = (cfg.base_url or "").rstrip("/") + "/chat/completions"
            headers["Authorization"] = f"Bearer {key}"
            body = {"model": cfg.model, "messages": wire_messages,
                    "temperature": cfg.temperature, "max_tokens": cfg.max_tokens}
        else:
            url = (cfg.base_url or "").rstrip("/") + "/api/chat"
            body = {"model": cfg.model, "messages": wire_messages, "stream": False,
                    "options": {"temperature": cfg.temperature,
                                "num_predict": cfg.max_tokens}}
        response = None
        for attempt in (0, 1):
            try:
                response = requests.post(url, json=body, headers=headers,
                                         timeout=cfg.timeout)
                break
            except requests.Timeout as exc:
                raise CompletionTimeout(str(exc)) from exc
            except requests.RequestException as exc:
                if attempt == 1:
                    raise NetworkFailure(str(exc)) from exc
        assert response is not None
        if not 200 <= response.status_code < 300:
            raise HttpStatusError(response.status_code, response.text[:200])
        try:
            data = response.json()
            if cfg.kind == "remote":
                choice = data["choices"][0]
                return choice["message"]["content"], choice.get("finish_reason") == "length"
            return data["message"]["content"], data.get("done_reason") == "length"
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise NetworkFailure(f"malformed completion response: {exc}") from exc


def load_script_file(path: str | Path) -> tuple[str, ...]:
    """Load a scripted-response file: entries separated by a line of `---`."""
    entries: list[str] = []
    current: list[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() == SCRIPT_SEPARATOR:
            entries.append("\n".join(current).strip())
            current = []
        else:
            current.append(line)
    tail = "\n".join(current).strip()
    if tail:
        entries.append(tail)
    return tuple(entry for entry in entries if entry)


def endpoint_from_profile(profile: str, base_dir: str | Path | None = None) -> EndpointConfig | None:
    """Resolve an endpoint profile string.

    "oracle" and "none" are built in; "scripted:<file>" loads a script file;
    anything else is a YAML file describing an EndpointConfig.
    """
    if profile == "none":
        return None
    if profile == "oracle":
        return EndpointConfig(kind="oracle")
    base = Path(base_dir) if base_dir else Path.cwd()
    if profile.startswith("scripted:"):
        script_path = Path(profile.split(":", 1)[1])
        if not script_path.is_absolute():
            script_path = base / script_path
        return EndpointConfig(kind="scripted", script=load_script_file(script_path))
    import yaml

    path = Path(profile)
    if not path.is_absolute():
        path = base / path
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError(f"endpoint profile {path} must be a mapping with a 'kind' key")
    if isinstance(data.get("script"), list):
        data["script"] = tuple(data["script"])
    return EndpointConfig(**data)


def client_from_profile(profile: str, base_dir: str | Path | None = None) -> ChatClient | None:
    config = endpoint_from_profile(profile, base_dir)
    return None if config is None else ChatClient(config)
