"""Conditional gradient (Frank-Wolfe) methods on bounded feasible sets.

The iteration queries the linear minimization oracle at the current
gradient, ``y = argmin_{v in Q} <grad f(x), v>``, and moves to the
convex combination ``x <- (1 - gamma) x + gamma y``.  Two step rules:

* ``Classic``   -- the open-loop schedule ``gamma_k = 2/(k+1)`` (k >= 1),
  with the guarantee ``f(x^N) - f* <= 2 L R^2 / (N+2)``;
* ``ShortStep`` -- ``gamma_k = min{ -<g, y-x> / (L ||y-x||^2), 1 }``,
  the minimizer of the quadratic upper model along the segment.  When
  it saturates at 1 the optimality gap at least halves.

``fw_gap(x) = <grad f(x), x - lmo(grad f(x))>`` is the standard duality
gap: nonnegative, zero only at solutions, and an upper bound on
``f(x) - f*`` for convex objectives.

Every iterate is a convex combination of feasible points, hence
feasible; iteration indices in the trace are 1-based to match the
``2/(k+1)`` schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core.oracles import (
    CountingOracle,
    OracleBudgetError,
    OracleSuite,
    RunStatus,
    Trace,
    TraceRecorder,
)
from .core.sets import FeasibleSet, FullSpace, UnboundedSetError


@dataclass(frozen=True)
class Classic:
    pass


@dataclass(frozen=True)
class ShortStep:
    L: Optional[float] = None  # resolved from the oracle when omitted


@dataclass(frozen=True)
class FwConfig:
    N: int
    step_rule: Classic | ShortStep = field(default_factory=Classic)
    tol: float = 0.0  # stop once the FW gap drops to tol (0 keeps only the exact-optimum stop)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


def run_fw(oracle: OracleSuite, fset: FeasibleSet, x0, cfg: FwConfig, *,
           record_every: int = 1, record_x: bool = False,
           max_oracle_calls: Optional[int] = None) -> Trace:
    """Frank-Wolfe from a feasible x0; performs N-1 steps and reports x^N."""
    if isinstance(fset, FullSpace):
        raise UnboundedSetError("Frank-Wolfe needs a bounded feasible set")
    x = fset.project(np.array(x0, dtype=float))
    if float(np.linalg.norm(x - np.asarray(x0, dtype=float))) > 1e-9:
        raise ValueError("x0 must be feasible")

    L = None
    if isinstance(cfg.step_rule, ShortStep):
        L = cfg.step_rule.L if cfg.step_rule.L is not None else oracle.L
        if L is None or L <= 0:
            raise ValueError("ShortStep requires a positive L (config or oracle)")

    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    status = RunStatus.BUDGET_EXHAUSTED
    f_last = None
    k = 1
    try:
        while k <= cfg.N - 1:
            g = ctr.grad(x)
            y = fset.lmo(g)
            d = y - x
            gap = -float(np.dot(g, d))  # FW duality gap at x
            if gap <= cfg.tol:
                status = RunStatus.CONVERGED
                f_last = ctr.value_final(x)
                rec.record(k, x, f_last, grad_norm=float(np.linalg.norm(g)),
                           step_size=0.0, force=True)
                break
            if isinstance(cfg.step_rule, Classic):
                gamma = 2.0 / (k + 1)
            else:
                gamma = min(max(gap / (L * float(np.dot(d, d))), 0.0), 1.0)
            if rec.due(k):
                rec.record(k, x, ctr.value(x), grad_norm=float(np.linalg.norm(g)),
                           step_size=gamma)
            x = (1.0 - gamma) * x + gamma * y
            k += 1
    except OracleBudgetError:
        pass
    if f_last is None:
        f_last = ctr.value_final(x)
        rec.record(k, x, f_last, force=True)
    return rec.finish(status, x, f_last)


def fw_gap(oracle: OracleSuite, fset: FeasibleSet, x) -> float:
    """Duality gap <grad f(x), x - lmo(grad f(x))> at a feasible point."""
    x = np.asarray(x, dtype=float)
    if oracle.grad is None:
        raise ValueError("fw_gap needs a gradient oracle")
    g = np.asarray(oracle.grad(x), dtype=float)
    y = fset.lmo(g)
    return float(np.dot(g, x - y))
