"""Scenario loading, end-to-end run execution, metrics, transcript persistence."""
