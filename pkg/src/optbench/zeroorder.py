"""Kernel-smoothed zeroth-order optimization.

The two-point directional estimator

    g~(x) = d * (f~(x + tau r e) - f~(x - tau r e)) / (2 tau) * K(r) * e,

with e uniform on the unit sphere, r uniform on [-1, 1] and K an odd
polynomial kernel, is an unbiased gradient estimator for linear
functions and has bias O(tau^{beta-1}) on beta-smooth ones.  The kernel
must satisfy the moment conditions (expectations over uniform r):

    E[K] = 0,   E[r K] = 1,   E[r^j K] = 0 for j = 2..beta-1.

:func:`build_kernel` constructs the minimal-degree odd polynomial
satisfying them for beta in {2, 3, 4, 5} and verifies the conditions by
Gauss-Legendre quadrature at construction.  Odd kernels meet the even-j
conditions automatically, so beta = 2, 3 share K(u) = 3u and
beta = 4, 5 share K(u) = (75u - 105u^3)/4.

:func:`run_zo_sgd` is projected SGD driven by the batched estimator;
each iteration consumes exactly ``2 * batch`` zeroth-order calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .core.oracles import CountingOracle, OracleBudgetError, OracleSuite, RunStatus, Trace, TraceRecorder
from .core.rng import Rng
from .core.sets import FeasibleSet, FullSpace
from .stochastic import AdaGradNorm, BudgetConst, Const, Decay, InvK, StepRule

_SUPPORTED_BETA = (2, 3, 4, 5)
_QUAD_NODES = 64
_MOMENT_TOL = 1e-10


@dataclass(frozen=True)
class Kernel:
    """Odd polynomial kernel K(u) = sum_i c_i u^{2i+1} on [-1, 1]."""

    beta: int
    odd_coeffs: np.ndarray  # coefficients of u, u^3, u^5, ...
    kappa: float            # int_{-1}^{1} K(u)^2 du
    kappa_beta: float       # int_{-1}^{1} |u|^beta |K(u)| du

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        u2 = u * u
        acc = np.zeros_like(u)
        for c in self.odd_coeffs[::-1]:
            acc = acc * u2 + c
        return acc * u

    def moment(self, j: int, nodes: int = _QUAD_NODES) -> float:
        """E[u^j K(u)] over uniform u in [-1, 1], by Gauss-Legendre quadrature."""
        t, w = np.polynomial.legendre.leggauss(nodes)
        return 0.5 * float(np.sum(w * t ** j * self(t)))


def build_kernel(beta: int) -> Kernel:
    """Minimal-degree odd kernel for smoothness order beta in {2, 3, 4, 5}."""
    if beta not in _SUPPORTED_BETA:
        raise ValueError(f"unsupported beta {beta}; supported: {_SUPPORTED_BETA}")
    l = beta - 1
    odd_orders = [j for j in range(1, l + 1) if j % 2 == 1] or [1]
    n = len(odd_orders)
    powers = [2 * i + 1 for i in range(n)]  # u, u^3, ...
    # E[u^m] = 1/(m+1) for even m; the system enforces E[u^j K] = 1{j==1}.
    M = np.array([[1.0 / (j + p + 1) for p in powers] for j in odd_orders])
    rhs = np.array([1.0 if j == 1 else 0.0 for j in odd_orders])
    coeffs = np.linalg.solve(M, rhs)

    t, w = np.polynomial.legendre.leggauss(200)
    kern = Kernel(beta=beta, odd_coeffs=coeffs, kappa=0.0, kappa_beta=0.0)
    kvals = kern(t)
    kappa = float(np.sum(w * kvals ** 2))
    kappa_beta = float(np.sum(w * np.abs(t) ** beta * np.abs(kvals)))
    kern = Kernel(beta=beta, odd_coeffs=coeffs, kappa=kappa, kappa_beta=kappa_beta)

    if abs(kern.moment(0)) > _MOMENT_TOL:
        raise AssertionError("kernel moment condition E[K] = 0 failed")
    if abs(kern.moment(1) - 1.0) > _MOMENT_TOL:
        raise AssertionError("kernel moment condition E[uK] = 1 failed")
    for j in range(2, l + 1):
        if abs(kern.moment(j)) > _MOMENT_TOL:
            raise AssertionError(f"kernel moment condition E[u^{j}K] = 0 failed")
    if not math.isfinite(kern.kappa_beta):
        raise AssertionError("kernel weight integral diverged")
    return kern


def kernel_grad_estimate(oracle: Union[OracleSuite, CountingOracle], x, tau: float,
                         kernel: Kernel, rng: Rng, batch: int = 1) -> np.ndarray:
    """Average of ``batch`` two-point kernel estimates; 2*batch oracle calls."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if isinstance(oracle, CountingOracle):
        zo = oracle.zo_value
    else:
        zo = oracle.zo_value_or_exact
    acc = np.zeros(d)
    scale = d / (2.0 * tau)
    for _ in range(batch):
        r = float(rng.uniform(-1.0, 1.0))
        e = rng.sphere(d)
        fp = zo(x + (tau * r) * e, rng)
        fm = zo(x - (tau * r) * e, rng)
        acc += (scale * (fp - fm) * float(kernel(r))) * e
    return acc / batch


@dataclass(frozen=True)
class ConstTau:
    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class PowerDecayTau:
    tau0: float
    exponent: float

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValueError("tau0 must be positive")
        if self.exponent < 0:
            raise ValueError("exponent must be >= 0")


TauSchedule = ConstTau | PowerDecayTau


@dataclass(frozen=True)
class ZoConfig:
    N: int
    step_rule: StepRule
    kernel: Kernel
    tau_schedule: TauSchedule = field(default_factory=lambda: ConstTau(1e-3))
    batch: int = 1

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be >= 0")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")


def run_zo_sgd(oracle: OracleSuite, fset: FeasibleSet, x0, cfg: ZoConfig, rng: Rng, *,
               record_every: int = 1, record_x: bool = False,
               max_oracle_calls: Optional[int] = None) -> Trace:
    """Projected SGD on the kernel gradient estimate (2*batch calls/iter)."""
    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = fset.project(np.array(x0, dtype=float))
    rule = cfg.step_rule
    if isinstance(rule, Const):
        const_gamma: Optional[float] = rule.gamma
    elif isinstance(rule, BudgetConst) and cfg.N >= 1:
        const_gamma = rule.R / (rule.M * math.sqrt(cfg.N))
    else:
        const_gamma = None
    sq_accum = 0.0
    project_needed = not isinstance(fset, FullSpace)
    status = RunStatus.BUDGET_EXHAUSTED
    k = 0
    try:
        for k in range(cfg.N):
            if isinstance(cfg.tau_schedule, ConstTau):
                tau = cfg.tau_schedule.tau
            else:
                tau = cfg.tau_schedule.tau0 * (k + 1) ** (-cfg.tau_schedule.exponent)
            g = kernel_grad_estimate(ctr, x, tau, cfg.kernel, rng, cfg.batch)
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
        k = cfg.N
    except OracleBudgetError:
        pass
    f_last = ctr.value_final(x)
    rec.record(k, x, f_last, force=True)
    return rec.finish(status, x, f_last)
