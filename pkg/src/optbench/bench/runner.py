"""Experiment execution: problem construction, noise wrapping, dispatch.

Seeding is derived from the spec's single seed: problem data use the
seed itself, noise wrappers use child stream (seed, 101) and method
randomness child stream (seed, 202), so identical spec text yields
byte-identical traces.
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..core.noise import wrap_noise
from ..core.oracles import Trace
from ..core.problems import default_x0, make_problem
from ..core.rng import Rng
from .config import ConfigError, ExperimentSpec
from .registry import METHODS
from .tracefile import format_for_path, write_trace

_NOISE_STREAM = 101
_METHOD_STREAM = 202


def run_experiment(spec: ExperimentSpec, trace_path: Optional[str] = None) -> tuple[Trace, dict]:
    """Run one experiment; returns (trace, summary) and writes the trace file.

    The summary reports the gap and distance at the run's output point,
    the oracle-call total, the terminal status and the wall time.
    """
    if spec.method_name not in METHODS:
        raise ConfigError(f"unknown method {spec.method_name!r}")
    t0 = time.perf_counter()
    oracle, fset = make_problem(spec.problem_name, spec.problem_params, spec.seed)
    noisy = wrap_noise(oracle, spec.noise, Rng(spec.seed).spawn(_NOISE_STREAM))
    x0 = spec.x0 if spec.x0 is not None else default_x0(spec.problem_name, spec.problem_params, spec.seed)
    if np.asarray(x0).shape[0] != oracle.dim:
        raise ConfigError(f"x0 has dimension {np.asarray(x0).shape[0]}, problem has {oracle.dim}")
    method_rng = Rng(spec.seed).spawn(_METHOD_STREAM)

    try:
        trace = METHODS[spec.method_name].run(noisy, fset, np.asarray(x0, dtype=float), spec, method_rng)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{spec.method_name} on {spec.problem_name}: {e}") from e
    wall = time.perf_counter() - t0

    f_out = trace.f_out if trace.f_out is not None else trace.final.f_value
    summary = {
        "final_gap": None if oracle.fstar is None else f_out - oracle.fstar,
        "final_dist": None if trace.x_out is None else oracle.dist_to_opt(trace.x_out),
        "oracle_calls": trace.final.oracle_calls,
        "status": None if trace.status is None else trace.status.value,
        "wall_time": wall,
    }
    path = trace_path or spec.trace_path
    if path:
        write_trace(trace, path, format_for_path(path))
    return trace, summary
