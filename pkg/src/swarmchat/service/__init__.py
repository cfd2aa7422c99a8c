"""Operator-facing service: snapshots, inform/instruct channels, event stream."""
