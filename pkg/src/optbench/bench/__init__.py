"""Benchmark harness: experiment configs, execution, rate fitting, trace files."""

from .config import ConfigError, ExperimentSpec, parse_config
from .rates import InsufficientDataError, RateFit, fit_rate
from .registry import METHODS, method_names, validate_method
from .runner import run_experiment
from .tracefile import read_trace, write_trace

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "InsufficientDataError",
    "METHODS",
    "RateFit",
    "fit_rate",
    "method_names",
    "parse_config",
    "read_trace",
    "run_experiment",
    "validate_method",
    "write_trace",
]
