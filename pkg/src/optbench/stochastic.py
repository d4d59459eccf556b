"""Projected stochastic gradient descent and Monte-Carlo statistics.

Step schedules:

* ``Const(gamma)``          -- fixed step;
* ``BudgetConst(R, M)``     -- gamma = R / (M sqrt(N)) for a known run length;
* ``InvK(mu)``              -- gamma_k = 1 / (mu (k+1)), the strongly convex rule;
* ``AdaGradNorm(R)``        -- gamma_k = R / sqrt(sum_{j<=k} ||g_j||^2);
* ``Decay(gamma0, eta)``    -- gamma_k = gamma0 (k+1)^{-eta} with eta in (1/2, 1),
  the slow decay used together with iterate averaging, whose averaged
  output attains the limit covariance H^{-1} Sigma H^{-1} of the CLT.

Averaging modes return the uniform mean of x^0..x^{N-1} or the mean of
the tail fraction.  Mini-batching averages ``batch`` independent draws;
``clip_lambda`` rescales the batched gradient to norm at most lambda
before the step (heavy-tail robustness).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core.oracles import (
    CountingOracle,
    OracleBudgetError,
    OracleSuite,
    RunStatus,
    Trace,
    TraceRecorder,
)
from .core.rng import Rng
from .core.sets import FeasibleSet, FullSpace


@dataclass(frozen=True)
class Const:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass(frozen=True)
class BudgetConst:
    R: float
    M: float

    def __post_init__(self):
        if not (self.R > 0 and self.M > 0):
            raise ValueError("R and M must be positive")


@dataclass(frozen=True)
class InvK:
    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class AdaGradNorm:
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")


@dataclass(frozen=True)
class Decay:
    gamma0: float
    eta: float = 0.6

    def __post_init__(self):
        if not self.gamma0 > 0:
            raise ValueError("gamma0 must be positive")
        if not 0.5 < self.eta < 1.0:
            raise ValueError("eta must lie in (1/2, 1)")


@dataclass(frozen=True)
class NoAveraging:
    pass


@dataclass(frozen=True)
class UniformAvg:
    pass


@dataclass(frozen=True)
class TailAvg:
    fraction: float = 0.5

    def __post_init__(self):
        if not 0 < self.fraction <= 1:
            raise ValueError("tail fraction must lie in (0, 1]")


StepRule = Const | BudgetConst | InvK | AdaGradNorm | Decay
Averaging = NoAveraging | UniformAvg | TailAvg


@dataclass(frozen=True)
class SgdConfig:
    N: int
    step_rule: StepRule
    batch: int = 1
    clip_lambda: Optional[float] = None
    averaging: Averaging = field(default_factory=NoAveraging)

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be >= 0")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.clip_lambda is not None and self.clip_lambda <= 0:
            raise ValueError("clip_lambda must be positive")


def clip(z: np.ndarray, lam: float) -> np.ndarray:
    """Rescale z to norm at most lam, preserving direction (0 stays 0)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    z = np.asarray(z, dtype=float)
    n = float(np.linalg.norm(z))
    if n <= lam:
        return z.copy()
    return z * (lam / n)


def run_sgd(oracle: OracleSuite, fset: FeasibleSet, x0, cfg: SgdConfig, rng: Rng, *,
            record_every: int = 1, record_x: bool = False,
            max_oracle_calls: Optional[int] = None) -> Trace:
    """Projected SGD x <- proj(x - gamma_k * g_k) with batching and averaging.

    Deterministic given the rng seed.  The recorded ``grad_norm`` is the
    norm of the applied (batched, possibly clipped) gradient.
    """
    if oracle.stoch_grad is None:
        raise ValueError("run_sgd needs a stochastic gradient oracle (wrap with AdditiveStochGrad)")
    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(np.array(x0, dtype=float))

    rule = cfg.step_rule
    N, b = cfg.N, cfg.batch
    if isinstance(rule, BudgetConst) and N >= 1:
        const_gamma: Optional[float] = rule.R / (rule.M * math.sqrt(N))
    elif isinstance(rule, Const):
        const_gamma = rule.gamma
    else:
        const_gamma = None
    sq_accum = 0.0  # AdaGradNorm running sum of squared gradient norms

    avg = cfg.averaging
    if isinstance(avg, UniformAvg):
        avg_start = 0
    elif isinstance(avg, TailAvg):
        avg_start = N - math.ceil(avg.fraction * N)
    else:
        avg_start = None
    avg_sum = np.zeros_like(x)
    avg_n = 0

    project_needed = not isinstance(fset, FullSpace)
    sg = ctr.stoch_grad
    lam = cfg.clip_lambda
    status = RunStatus.BUDGET_EXHAUSTED
    k = 0
    try:
        for k in range(N):
            if avg_start is not None and k >= avg_start:
                avg_sum += x
                avg_n += 1
            g = sg(x, rng)
            if b > 1:
                for _ in range(b - 1):
                    g = g + sg(x, rng)
                g = g / b
            if lam is not None:
                gn = float(np.linalg.norm(g))
                if gn > lam:
                    g = g * (lam / gn)
            if isinstance(rule, InvK):
                gamma = 1.0 / (rule.mu * (k + 1))
            elif isinstance(rule, AdaGradNorm):
                sq_accum += float(np.dot(g, g))
                gamma = rule.R / math.sqrt(sq_accum) if sq_accum > 0 else 0.0
            elif isinstance(rule, Decay):
                gamma = rule.gamma0 * (k + 1) ** (-rule.eta)
            else:
                gamma = const_gamma
            if rec.due(k):
                rec.record(k, x, ctr.value(x), grad_norm=float(np.linalg.norm(g)),
                           step_size=gamma)
            x = x - gamma * g
            if project_needed:
                x = fset.project(x)
        k = N
    except OracleBudgetError:
        pass
    f_last = ctr.value_final(x)
    rec.record(k, x, f_last, force=True)
    if avg_start is not None and avg_n > 0:
        x_out = avg_sum / avg_n
        f_out = ctr.value_final(x_out)
    else:
        x_out, f_out = x, f_last
    return rec.finish(status, x_out, f_out)


@dataclass(frozen=True)
class MonteCarloStats:
    replicas: int
    mean: np.ndarray
    covariance: np.ndarray
    seed: int


def monte_carlo_mean_cov(run_fn: Callable[[Rng], np.ndarray], replicas: int,
                         seed: int) -> MonteCarloStats:
    """Sample mean and unbiased covariance of ``run_fn`` outputs.

    Replica i receives the derived stream ``Rng((seed, i))``, so results
    do not depend on execution order and are reproducible from ``seed``.
    """
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    outs = []
    for i in range(replicas):
        v = np.asarray(run_fn(Rng((int(seed), i))), dtype=float)
        if v.ndim != 1:
            raise ValueError("run_fn must return a vector per replica")
        outs.append(v)
    X = np.stack(outs)
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (replicas - 1)
    cov = 0.5 * (cov + cov.T)
    return MonteCarloStats(replicas=replicas, mean=mean, covariance=cov, seed=int(seed))
