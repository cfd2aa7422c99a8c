"""Per-robot LLM orchestration: prompts, rounds, parsing, anomalies, directives."""
