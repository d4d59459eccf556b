"""Nonsmooth subgradient methods.

* :func:`run_polyak_subgrad` -- projected subgradient descent with the
  Polyak step ``h_k = (f(x^k) - f*) / ||g_k||^2``, which requires the
  optimal value and drives the distance to the minimizer set down
  monotonically.
* :func:`run_const_subgrad` -- constant-step subgradient descent, either
  with a user step or with the budget-tuned ``h = R / (M sqrt(N))``, and
  optional uniform averaging of the first N iterates.
* :func:`run_switching` -- the adaptive switching scheme for problems
  with a functional constraint ``g(x) <= 0``: descend on f while the
  constraint is nearly satisfied (productive steps), on g otherwise.
* :func:`run_restarted_switching` -- restarts of the switching scheme
  that halve the distance bound per stage under a conditional
  sharp-minimum assumption.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core.oracles import (
    ConstraintOracle,
    CountingOracle,
    OracleBudgetError,
    OracleSuite,
    RunStatus,
    Trace,
    TraceRecorder,
    ZeroSubgradientError,
)
from .core.sets import FeasibleSet


@dataclass(frozen=True)
class PolyakStep:
    """Step from the optimality gap; fstar defaults to the oracle's value."""

    fstar: Optional[float] = None


@dataclass(frozen=True)
class FixedStep:
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step must be positive")


@dataclass(frozen=True)
class BudgetStep:
    """h = R / (M sqrt(N)) for a known Lipschitz bound and start radius."""

    M: float
    R: float

    def __post_init__(self):
        if not (self.M > 0 and self.R > 0):
            raise ValueError("M and R must be positive")


@dataclass(frozen=True)
class SubgradConfig:
    step_rule: PolyakStep | FixedStep | BudgetStep
    N: int
    tol: float = 0.0
    averaging: bool = False

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("budget N must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


class NoProductiveStepsError(RuntimeError):
    pass


def run_polyak_subgrad(oracle: OracleSuite, fset: FeasibleSet, x0, cfg: SubgradConfig,
                       *, record_every: int = 1, record_x: bool = False,
                       max_oracle_calls: Optional[int] = None) -> Trace:
    """Projected subgradient descent with the Polyak step.

    Stops as converged once ``f(x^k) - f* <= tol`` (checked before the
    step is formed, which also guards the division by ``||g||^2``).
    A zero subgradient above the tolerance contradicts convexity with a
    correct ``f*`` and raises :class:`ZeroSubgradientError`.
    """
    if not isinstance(cfg.step_rule, PolyakStep):
        raise ValueError("run_polyak_subgrad requires a PolyakStep rule")
    fstar = cfg.step_rule.fstar if cfg.step_rule.fstar is not None else oracle.fstar
    if fstar is None:
        raise ValueError("the Polyak step needs the optimal value f*")

    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(x0)
    status = RunStatus.BUDGET_EXHAUSTED
    f_last: Optional[float] = None
    k = 0
    while True:
        if k >= cfg.N:
            break
        try:
            fx = ctr.value(x)
            gap = fx - fstar
            if gap <= cfg.tol:
                rec.record(k, x, fx, grad_norm=None, step_size=0.0, force=True)
                status = RunStatus.CONVERGED
                f_last = fx
                break
            g = ctr.subgrad(x)
            gn2 = float(np.dot(g, g))
            if gn2 == 0.0:
                raise ZeroSubgradientError(
                    f"zero subgradient off-optimum at iter {k} (gap {gap:.3e})")
            h = gap / gn2
            rec.record(k, x, fx, grad_norm=math.sqrt(gn2), step_size=h)
            x = fset.project(x - h * g)
            k += 1
        except OracleBudgetError:
            break
    if f_last is None:
        f_last = ctr.value_final(x)
        rec.record(k, x, f_last, force=True)
    return rec.finish(status, x, f_last)


def run_const_subgrad(oracle: OracleSuite, fset: FeasibleSet, x0, cfg: SubgradConfig,
                      *, record_every: int = 1, record_x: bool = False,
                      max_oracle_calls: Optional[int] = None) -> Trace:
    """Constant-step subgradient descent over iterates x^0 .. x^{N-1}.

    With ``averaging`` on, the reported point is the uniform average of
    those N iterates (the budget-step tuning then guarantees
    ``f(avg) - f* <= M R / sqrt(N)``).
    """
    if isinstance(cfg.step_rule, FixedStep):
        h = cfg.step_rule.h
    elif isinstance(cfg.step_rule, BudgetStep):
        h = cfg.step_rule.R / (cfg.step_rule.M * math.sqrt(cfg.N))
    else:
        raise ValueError("run_const_subgrad requires FixedStep or BudgetStep")

    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(x0)
    sum_x = np.zeros_like(x)
    n_seen = 0
    status = RunStatus.BUDGET_EXHAUSTED
    try:
        for k in range(cfg.N):
            sum_x += x
            n_seen += 1
            last = k == cfg.N - 1
            if last:
                rec.record(k, x, ctr.value(x), step_size=0.0, force=True)
                break
            g = ctr.subgrad(x)
            if rec.due(k):
                rec.record(k, x, ctr.value(x), grad_norm=float(np.linalg.norm(g)),
                           step_size=h)
            x = fset.project(x - h * g)
    except OracleBudgetError:
        pass
    if not rec.rows or rec.rows[-1].iter != n_seen - 1:
        rec.record(n_seen - 1, x, ctr.value_final(x), step_size=0.0, force=True)
    x_out = sum_x / n_seen if cfg.averaging else x
    f_out = ctr.value_final(x_out)
    return rec.finish(status, x_out, f_out)


@dataclass(frozen=True)
class SwitchingConfig:
    """Inputs of the switching scheme (and of its restarted version).

    theta0 must satisfy ``2 theta0^2 >= ||x* - x0||^2``; Mg is the
    Lipschitz constant of the constraint (taken from the constraint
    oracle when omitted).  ``eps_target`` and ``alpha_sharp`` are only
    used by the restarted variant.
    """

    delta: float = 0.0
    theta0: float = 1.0
    Mg: Optional[float] = None
    max_iters: int = 100_000
    eps_target: Optional[float] = None
    alpha_sharp: Optional[float] = None

    def __post_init__(self):
        if self.theta0 <= 0:
            raise ValueError("theta0 must be positive")
        if self.max_iters < 1:
            raise ValueError("iteration cap must be >= 1")
        if self.eps_target is not None and self.eps_target <= 0:
            raise ValueError("eps_target must be positive")
        if self.alpha_sharp is not None and self.alpha_sharp <= 0:
            raise ValueError("alpha_sharp must be positive")


def _switching_stage(ctr: CountingOracle, rec: TraceRecorder, fset: FeasibleSet,
                     x: np.ndarray, delta: float, theta: float, Mg: float,
                     cap: int, start_iter: int, stage_tag: str):
    """One run of the switching scheme; returns (best_x, best_f, x_end, iters, stopped)."""
    threshold = 2.0 * theta * theta / (delta * delta)
    sum_productive = 0.0
    n_nonproductive = 0
    best_f = math.inf
    best_x: Optional[np.ndarray] = None
    k = 0
    stopped = False
    while k < cap:
        it = start_iter + k
        gx = ctr.constraint_value(x)
        if gx <= delta * Mg:
            fx = ctr.value(x)
            g = ctr.subgrad(x)
            gn2 = float(np.dot(g, g))
            if fx < best_f:
                best_f, best_x = fx, x.copy()
            if gn2 == 0.0:
                # Minimal-norm selection hit an exact minimizer of f on a
                # productive step: the stop sum is +inf, stop here.
                rec.record(it, x, fx, grad_norm=0.0, step_size=0.0,
                           tag=stage_tag + "productive", force=True)
                k += 1
                stopped = True
                break
            h = delta / gn2
            rec.record(it, x, fx, grad_norm=math.sqrt(gn2), step_size=h,
                       tag=stage_tag + "productive")
            x = fset.project(x - h * g)
            sum_productive += 1.0 / gn2
        else:
            g = ctr.constraint_subgrad(x)
            gn = float(np.linalg.norm(g))
            if Mg > 0 and gn > Mg * (1 + 1e-9):
                warnings.warn(f"constraint subgradient norm {gn:.3g} exceeds the declared Mg={Mg:.3g}; "
                              "the switching guarantee is void", stacklevel=3)
            if gn == 0.0:
                raise ZeroSubgradientError("zero constraint subgradient on a nonproductive step")
            h = delta / gn
            if rec.due(it):
                fx = ctr.value(x)
                rec.record(it, x, fx, grad_norm=gn, step_size=h,
                           tag=stage_tag + "nonproductive")
            x = fset.project(x - h * g)
            n_nonproductive += 1
        k += 1
        # 1e-9 relative slack absorbs float dust in theta^2 / delta^2.
        if sum_productive + n_nonproductive >= threshold * (1.0 - 1e-9):
            stopped = True
            break
    return best_x, best_f, x, k, stopped


def run_switching(oracle: OracleSuite, constraint: Optional[ConstraintOracle],
                  fset: FeasibleSet, x0, cfg: SwitchingConfig,
                  *, record_every: int = 1, record_x: bool = False,
                  max_oracle_calls: Optional[int] = None) -> tuple[np.ndarray, Trace]:
    """Adaptive switching subgradient scheme for min f s.t. g <= 0 on Q.

    Productive steps (taken when ``g(x) <= delta * Mg``) use
    ``h = delta / ||grad f||^2``; nonproductive ones use
    ``h = delta / ||grad g||``.  The run stops once
    ``2 theta0^2 / delta^2 <= sum_I ||grad f||^{-2} + #nonproductive``
    and returns the best productive iterate, which then satisfies
    ``f - f* <= delta`` and ``g <= delta * Mg``.
    """
    if cfg.delta <= 0:
        raise ValueError("delta must be positive")
    constraint = constraint if constraint is not None else oracle.constraint
    if constraint is None:
        raise ValueError("run_switching needs a functional constraint oracle")
    Mg = cfg.Mg if cfg.Mg is not None else constraint.lipschitz
    if Mg is None or Mg <= 0:
        raise ValueError("a positive Lipschitz bound Mg for the constraint is required")

    ctr = CountingOracle(oracle, max_oracle_calls, constraint=constraint)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(x0)
    try:
        best_x, best_f, x_end, iters, stopped = _switching_stage(
            ctr, rec, fset, x, cfg.delta, cfg.theta0, Mg, cfg.max_iters, 0, "")
    except OracleBudgetError:
        raise  # a budget this tight gives no usable scheme output
    if best_x is None:
        raise NoProductiveStepsError("switching scheme stopped without any productive step")
    status = RunStatus.CONVERGED if stopped else RunStatus.BUDGET_EXHAUSTED
    rec.record(iters, x_end, ctr.value_final(x_end), force=True)
    trace = rec.finish(status, best_x, best_f)
    return best_x, trace


def run_restarted_switching(oracle: OracleSuite, constraint: Optional[ConstraintOracle],
                            fset: FeasibleSet, x0, cfg: SwitchingConfig,
                            *, record_every: int = 1, record_x: bool = False,
                            max_oracle_calls: Optional[int] = None) -> tuple[np.ndarray, Trace]:
    """Restarted switching scheme under a conditional sharp minimum.

    Stage p runs the switching scheme with ``theta_p = theta0 / 2^{p/2}``
    and ``delta_p = alpha * theta_p / (sqrt(2) max(1, Mg))``, restarting
    from the previous stage's output; there are exactly
    ``ceil(2 log2(theta0 / eps))`` stages, after which the output is
    within ``eps`` of the minimizer set.
    """
    constraint = constraint if constraint is not None else oracle.constraint
    if constraint is None:
        raise ValueError("run_restarted_switching needs a functional constraint oracle")
    alpha = cfg.alpha_sharp if cfg.alpha_sharp is not None else oracle.alpha_sharp
    if alpha is None or alpha <= 0:
        raise ValueError("a positive sharp-minimum constant is required")
    if cfg.eps_target is None:
        raise ValueError("eps_target is required for the restarted scheme")
    Mg = cfg.Mg if cfg.Mg is not None else constraint.lipschitz
    if Mg is None or Mg <= 0:
        raise ValueError("a positive Lipschitz bound Mg for the constraint is required")

    ctr = CountingOracle(oracle, max_oracle_calls, constraint=constraint)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(x0)

    if cfg.eps_target >= cfg.theta0:
        # Already within the target radius by assumption on theta0.
        f0 = ctr.value_final(x)
        rec.record(0, x, f0, force=True)
        return x.copy(), rec.finish(RunStatus.CONVERGED, x, f0)

    n_stages = math.ceil(2.0 * math.log2(cfg.theta0 / cfg.eps_target))
    mg_eff = max(1.0, Mg)
    status = RunStatus.CONVERGED
    it = 0
    for p in range(1, n_stages + 1):
        theta_p = cfg.theta0 / math.sqrt(2.0 ** p)
        delta_p = alpha * theta_p / (math.sqrt(2.0) * mg_eff)
        try:
            best_x, _, _, iters, stopped = _switching_stage(
                ctr, rec, fset, x, delta_p, theta_p, Mg, cfg.max_iters, it, f"p{p}:")
        except OracleBudgetError:
            status = RunStatus.BUDGET_EXHAUSTED
            break
        if best_x is None:
            raise NoProductiveStepsError(f"restart stage {p} produced no productive step")
        x = best_x
        it += iters
        if not stopped:
            status = RunStatus.BUDGET_EXHAUSTED
            break
    f_out = ctr.value_final(x)
    rec.record(it, x, f_out, force=True)
    return x.copy(), rec.finish(status, x, f_out)
