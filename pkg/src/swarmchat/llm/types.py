"""Conversation protocol types and completion errors."""

from __future__ import annotations

from dataclasses import dataclass, field

ROLES = ("system", "user", "assistant")
BACKEND_KINDS = ("remote", "local", "scripted", "oracle")


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")


@dataclass
class EndpointConfig:
    """Where and how completions are produced.

    remote: OpenAI-compatible chat endpoint (needs base_url + api_key_env).
    local: Ollama-compatible chat endpoint (needs base_url).
    scripted: canned responses popped in request order (needs script).
    oracle: the deterministic rule-based model stand-in.
    """

    kind: str
    base_url: str | None = None
    model: str = "default"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout: float = 30.0
    api_key_env: str | None = None
    script: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"kind must be one of {BACKEND_KINDS}, got {self.kind!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.kind == "remote" and (not self.base_url or not self.api_key_env):
            raise ValueError("remote endpoints require base_url and api_key_env")
        if self.kind == "local" and not self.base_url:
            raise ValueError("local endpoints require base_url")
        if self.kind == "scripted":
            self.script = tuple(self.script)
            if not self.script:
                raise ValueError("scripted endpoints require a non-empty script")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency: float
    backend: str
    truncated: bool = False


class CompletionError(Exception):
    """Base for all completion failures; callers treat any of these as
    'no response this round' and never abort the simulation."""


class NetworkFailure(CompletionError):
    pass


class HttpStatusError(CompletionError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}: {detail}" if detail else f"HTTP {status}")
        self.status = status


class CompletionTimeout(CompletionError):
    pass


class ScriptExhausted(CompletionError):
    pass
