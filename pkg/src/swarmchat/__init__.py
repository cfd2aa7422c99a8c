"""Deterministic robot-swarm simulation with per-robot LLM orchestration."""

__version__ = "0.1.0"
