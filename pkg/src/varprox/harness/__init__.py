"""Experiment harness: seeded data generation, runners, and report plumbing."""

from .experiments import run
from .reports import ConfigError, ExperimentConfig, validate_report

__all__ = ["ConfigError", "ExperimentConfig", "run", "validate_report"]
