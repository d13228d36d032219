"""Experiment harness: configuration, orchestration, reporting, CLI."""
