"""Experiment configuration: JSON schema, strict parsing, validation.

A config document is a single JSON object:

    {
      "problem": {"name": "quad_diag", "params": {"lambdas": [10, 1]}, "seed": 0},
      "noise":   {"kind": "relative_grad", "alpha": 0.25, "mode": "shrink"},
      "method":  {"name": "gd_rel", "params": {"alpha": 0.25}},
      "budget":  {"iterations": 200, "max_oracle_calls": null},
      "output":  {"trace_path": null, "record_every": 1, "record_x": false},
      "x0": [1.0, 1.0]
    }

``problem`` and ``method`` may also be bare name strings, and
``iterations`` may be given at the top level.  Unknown keys are rejected
at every level to catch typos; problem and method names and parameters
are validated at parse time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..core.noise import (
    AbsoluteGrad,
    AdditiveStochGrad,
    NoNoise,
    NoiseSpec,
    RelativeGrad,
    ZOBoundedValue,
    ZOStochValue,
)
from ..core.problems import UnknownProblemError, make_problem

_MAX_TRACE_ROWS = 100_000


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    problem_name: str
    method_name: str
    iterations: int
    problem_params: dict = field(default_factory=dict)
    seed: int = 0
    noise: NoiseSpec = field(default_factory=NoNoise)
    method_params: dict = field(default_factory=dict)
    max_oracle_calls: Optional[int] = None
    trace_path: Optional[str] = None
    record_every: int = 1
    record_x: bool = False
    x0: Optional[np.ndarray] = None

    def with_seed(self, seed: int) -> "ExperimentSpec":
        return replace(self, seed=int(seed))


def _require_keys(obj: dict, allowed: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}; allowed: {sorted(allowed)}")


_NOISE_SCHEMAS = {
    "none": (NoNoise, set()),
    "absolute_grad": (None, {"delta", "mode", "v"}),
    "relative_grad": (None, {"alpha", "mode"}),
    "additive_stoch_grad": (None, {"sigma", "distribution"}),
    "zo_bounded": (None, {"delta", "mode"}),
    "zo_stoch": (None, {"delta_tilde"}),
}


def _parse_noise(obj) -> NoiseSpec:
    if obj is None:
        return NoNoise()
    if not isinstance(obj, dict):
        raise ConfigError("noise must be an object with a 'kind' key")
    kind = obj.get("kind")
    if kind not in _NOISE_SCHEMAS:
        raise ConfigError(f"unknown noise kind {kind!r}; available: {sorted(_NOISE_SCHEMAS)}")
    _, allowed = _NOISE_SCHEMAS[kind]
    _require_keys(obj, allowed | {"kind"}, "noise")
    try:
        if kind == "none":
            return NoNoise()
        if kind == "absolute_grad":
            v = obj.get("v")
            return AbsoluteGrad(delta=float(obj["delta"]),
                                mode=obj.get("mode", "fixed" if v is not None else "random_direction"),
                                v=None if v is None else np.asarray(v, dtype=float))
        if kind == "relative_grad":
            return RelativeGrad(alpha=float(obj["alpha"]), mode=obj.get("mode", "shrink"))
        if kind == "additive_stoch_grad":
            return AdditiveStochGrad(sigma=float(obj["sigma"]),
                                     distribution=obj.get("distribution", "gaussian"))
        if kind == "zo_bounded":
            return ZOBoundedValue(delta=float(obj["delta"]),
                                  mode=obj.get("mode", "deterministic_worst"))
        return ZOStochValue(delta_tilde=float(obj["delta_tilde"]))
    except KeyError as e:
        raise ConfigError(f"noise kind {kind!r}: missing required field {e.args[0]!r}") from None
    except ValueError as e:
        raise ConfigError(f"noise: {e}") from None


def parse_config(text: str) -> ExperimentSpec:
    """Parse and validate a JSON experiment document."""
    from .registry import validate_method  # deferred: registry imports method modules

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"parse error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(doc, {"problem", "noise", "method", "budget", "output", "x0", "iterations"},
                  "config")

    problem = doc.get("problem")
    if problem is None:
        raise ConfigError("missing required field 'problem'")
    if isinstance(problem, str):
        problem = {"name": problem}
    _require_keys(problem, {"name", "params", "seed"}, "problem")
    if "name" not in problem:
        raise ConfigError("problem: missing required field 'name'")
    problem_params = dict(problem.get("params") or {})
    seed = int(problem.get("seed", 0))

    method = doc.get("method")
    if method is None:
        raise ConfigError("missing required field 'method'")
    if isinstance(method, str):
        method = {"name": method}
    _require_keys(method, {"name", "params"}, "method")
    if "name" not in method:
        raise ConfigError("method: missing required field 'name'")
    method_params = dict(method.get("params") or {})

    budget = doc.get("budget") or {}
    _require_keys(budget, {"iterations", "max_oracle_calls"}, "budget")
    iterations = doc.get("iterations", budget.get("iterations"))
    if iterations is None:
        raise ConfigError("missing required field 'iterations' (top level or under budget)")
    iterations = int(iterations)
    if iterations < 0:
        raise ConfigError("iterations must be >= 0")
    max_calls = budget.get("max_oracle_calls")
    if max_calls is not None:
        max_calls = int(max_calls)
        if max_calls < 1:
            raise ConfigError("max_oracle_calls must be >= 1")

    output = doc.get("output") or {}
    _require_keys(output, {"trace_path", "record_every", "record_x"}, "output")
    record_every = output.get("record_every")
    if record_every is None:
        # keep traces under _MAX_TRACE_ROWS rows by default
        record_every = max(1, -(-(iterations + 1) // _MAX_TRACE_ROWS))
    record_every = int(record_every)
    if record_every < 1:
        raise ConfigError("record_every must be >= 1")

    noise = _parse_noise(doc.get("noise"))

    x0 = doc.get("x0")
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if x0.ndim != 1:
            raise ConfigError("x0 must be a flat list of numbers")

    # Resolve names and validate parameters now so typos fail at parse time.
    try:
        make_problem(problem["name"], problem_params, seed)
    except UnknownProblemError as e:
        raise ConfigError(str(e)) from None
    except ValueError as e:
        raise ConfigError(f"problem {problem['name']!r}: {e}") from None
    validate_method(method["name"], method_params)

    return ExperimentSpec(
        problem_name=problem["name"],
        problem_params=problem_params,
        seed=seed,
        noise=noise,
        method_name=method["name"],
        method_params=method_params,
        iterations=iterations,
        max_oracle_calls=max_calls,
        trace_path=output.get("trace_path"),
        record_every=record_every,
        record_x=bool(output.get("record_x", False)),
        x0=x0,
    )
