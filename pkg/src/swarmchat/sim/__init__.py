"""Deterministic discrete-time simulation of differential-drive robots."""
