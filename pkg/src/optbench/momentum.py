"""Momentum and accelerated methods, plus conjugate gradients on quadratics.

Variants of :func:`run_momentum`:

* ``heavy_ball``     -- two-term recurrence with constant coefficients
  ``4/(sqrt(L)+sqrt(mu))^2`` and ``((sqrt(L)-sqrt(mu))/(sqrt(L)+sqrt(mu)))^2``;
* ``chebyshev``      -- the Chebyshev semi-iterative recurrence whose
  delta_k coefficients converge to the heavy-ball limit;
* ``nesterov_sc``    -- look-ahead momentum with the constant factor
  ``(sqrt(L)-sqrt(mu))/(sqrt(L)+sqrt(mu))`` (strongly convex tuning);
* ``nesterov_cvx``   -- the convex tuning with momentum ``(k-1)/(k+2)``;
* ``taylor_drori``   -- the exact worst-case-optimal recurrence for
  smooth strongly convex problems (A_k, tau_k, delta_k bookkeeping).

Objective values may increase along these trajectories; that is expected
and not flagged.  Divergence is detected only by the distance monitor.

:func:`run_cg_quadratic` performs the two-parameter subspace
minimization ``x+ = x - a g + b (x - x_prev)`` with (a, b) solved in
closed form, valid for quadratic catalog problems; it reaches the exact
minimizer in at most d iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core.oracles import (
    CountingOracle,
    OracleBudgetError,
    OracleSuite,
    RunStatus,
    Trace,
    TraceRecorder,
    UnsupportedProblemError,
)

VARIANTS = ("heavy_ball", "chebyshev", "nesterov_sc", "nesterov_cvx", "taylor_drori")
# taylor_drori degenerates gracefully to its convex tuning at mu = 0.
_NEEDS_MU = ("heavy_ball", "chebyshev", "nesterov_sc")


@dataclass(frozen=True)
class MomentumConfig:
    variant: str
    N: int
    L: Optional[float] = None
    mu: Optional[float] = None
    tol: float = 1e-10

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown momentum variant {self.variant!r}; choose from {VARIANTS}")
        if self.N < 0:
            raise ValueError("budget N must be >= 0")
        if self.L is not None and self.mu is not None and self.mu > self.L:
            raise ValueError("mu must not exceed L")


def _resolve(oracle: OracleSuite, cfg: MomentumConfig) -> tuple[float, float]:
    L = cfg.L if cfg.L is not None else oracle.L
    if L is None or L <= 0:
        raise ValueError("a positive L is required (config or oracle)")
    mu = cfg.mu if cfg.mu is not None else oracle.mu
    if cfg.variant in _NEEDS_MU:
        if mu is None or mu <= 0:
            raise ValueError(f"variant {cfg.variant!r} requires mu > 0")
        if mu > L:
            raise ValueError("mu must not exceed L")
        if cfg.variant == "chebyshev" and not mu < L:
            raise ValueError("chebyshev requires mu < L strictly")
    else:
        mu = 0.0 if mu is None else mu
    return float(L), float(mu)


def chebyshev_delta_limit(L: float, mu: float) -> float:
    """Fixed point of the Chebyshev delta recurrence."""
    return (math.sqrt(L) - math.sqrt(mu)) / (math.sqrt(L) + math.sqrt(mu))


def heavy_ball_coefficients(L: float, mu: float) -> tuple[float, float]:
    s = (math.sqrt(L) + math.sqrt(mu)) ** 2
    return 4.0 / s, (math.sqrt(L) - math.sqrt(mu)) ** 2 / s


def run_momentum(oracle: OracleSuite, x0, cfg: MomentumConfig, *,
                 record_every: int = 1, record_x: bool = False,
                 max_oracle_calls: Optional[int] = None,
                 divergence_radius: float = 1e6) -> Trace:
    """Run the configured momentum variant; see the module docstring."""
    L, mu = _resolve(oracle, cfg)
    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)
    x = np.array(x0, dtype=float)
    x_start = x.copy()
    x_prev = x.copy()
    z = x.copy()  # taylor_drori auxiliary sequence
    A_k = 0.0
    q = mu / L
    status = RunStatus.BUDGET_EXHAUSTED
    f_last: Optional[float] = None
    delta_cheb: Optional[float] = None
    k = 0
    try:
        while k < cfg.N:
            if cfg.variant in ("heavy_ball", "chebyshev"):
                g = ctr.grad(x)
            elif cfg.variant in ("nesterov_sc", "nesterov_cvx"):
                if cfg.variant == "nesterov_sc":
                    beta = (math.sqrt(L) - math.sqrt(mu)) / (math.sqrt(L) + math.sqrt(mu))
                else:
                    beta = (k + 1 - 1) / (k + 1 + 2)  # momentum (j-1)/(j+2), j = k+1 >= 1
                y = x + beta * (x - x_prev)
                g = ctr.grad(y)
            else:  # taylor_drori evaluates at y^k below
                A_next = ((1 + q) * A_k + 2.0 * (1 + math.sqrt((1 + A_k) * (1 + q * A_k)))) / (1 - q) ** 2
                tau = 1.0 - A_k / ((1 - q) * A_next)
                delta = 0.5 * ((1 - q) ** 2 * A_next - (1 + q) * A_k) / (1 + q + q * A_k)
                y = x + tau * (z - x)
                g = ctr.grad(y)
            gn = float(np.linalg.norm(g))
            if not math.isfinite(gn):
                status = RunStatus.DIVERGED
                break
            if gn <= cfg.tol:
                status = RunStatus.CONVERGED
                f_last = ctr.value_final(x)
                rec.record(k, x, f_last, grad_norm=gn, step_size=0.0, force=True)
                break  # f_out for taylor_drori is recomputed at z below

            if cfg.variant == "heavy_ball":
                step, beta_hb = heavy_ball_coefficients(L, mu)
                x_new = x - step * g + beta_hb * (x - x_prev)
            elif cfg.variant == "chebyshev":
                if k == 0:
                    step, beta_ch = 2.0 / (L + mu), 0.0
                    delta_cheb = 1.0 / (2.0 * (L + mu) / (L - mu) + 1.0)
                else:
                    step = 4.0 * delta_cheb / (L - mu)
                    beta_ch = 2.0 * delta_cheb * (L + mu) / (L - mu) - 1.0
                    delta_cheb = 1.0 / (2.0 * (L + mu) / (L - mu) - delta_cheb)
                x_new = x - step * g + beta_ch * (x - x_prev)
            elif cfg.variant in ("nesterov_sc", "nesterov_cvx"):
                step = 1.0 / L
                x_new = y - step * g
            else:
                step = 1.0 / L
                x_new = y - step * g
                z = (1.0 - q * delta) * z + q * delta * y - (delta / L) * g
                A_k = A_next

            if rec.due(k):
                rec.record(k, x, ctr.value(x), grad_norm=gn, step_size=step)
            x_prev, x = x, x_new
            k += 1
            if not np.all(np.isfinite(x)) or float(np.linalg.norm(x - x_start)) > divergence_radius:
                status = RunStatus.DIVERGED
                break
    except OracleBudgetError:
        pass
    if f_last is None:
        f_last = ctr.value_final(x)
        rec.record(k, x, f_last, force=True)
    if cfg.variant == "taylor_drori":
        return rec.finish(status, z, ctr.value_final(z))
    return rec.finish(status, x, f_last)


def chebyshev_delta_sequence(L: float, mu: float, n: int) -> np.ndarray:
    """delta_1 .. delta_n of the Chebyshev recurrence (diagnostic helper)."""
    if not L > mu > 0:
        raise ValueError("requires L > mu > 0")
    ratio = 2.0 * (L + mu) / (L - mu)
    out = np.empty(n)
    d = 1.0 / (ratio + 1.0)
    for i in range(n):
        out[i] = d
        d = 1.0 / (ratio - d)
    return out


def run_cg_quadratic(oracle: OracleSuite, x0, N: int, *, tol: float = 0.0,
                     record_every: int = 1, record_x: bool = False,
                     max_oracle_calls: Optional[int] = None) -> Trace:
    """Conjugate gradients via two-parameter subspace minimization.

    Each step minimizes the quadratic exactly over
    ``x - a g + b (x - x_prev)``; the 2x2 normal system is closed-form.
    A singular system (first step, or g and the momentum direction
    parallel) falls back to an exact-line-search gradient step.
    """
    if oracle.quadratic is None:
        raise UnsupportedProblemError("run_cg_quadratic needs a quadratic oracle (A-products and b)")
    if N < 0:
        raise ValueError("budget N must be >= 0")
    quad = oracle.quadratic
    ctr = CountingOracle(oracle, max_oracle_calls)
    rec = TraceRecorder(oracle, ctr, record_every, record_x)

    def matvec(v):
        ctr.count_extra()
        return quad.matvec(v)

    x = np.array(x0, dtype=float)
    x_prev = x.copy()
    status = RunStatus.BUDGET_EXHAUSTED
    f_last: Optional[float] = None
    k = 0
    try:
        while k < N:
            g = ctr.grad(x)
            gn = float(np.linalg.norm(g))
            if gn <= tol:
                status = RunStatus.CONVERGED
                f_last = ctr.value_final(x)
                rec.record(k, x, f_last, grad_norm=gn, step_size=0.0, force=True)
                break
            d = x - x_prev
            Ag = matvec(g)
            gAg = float(np.dot(g, Ag))
            gg = float(np.dot(g, g))
            use_fallback = float(np.dot(d, d)) == 0.0
            if not use_fallback:
                Ad = matvec(d)
                gAd = float(np.dot(g, Ad))
                dAd = float(np.dot(d, Ad))
                det = gAg * dAd - gAd * gAd
                if abs(det) <= 1e-14 * max(abs(gAg * dAd), 1e-300):
                    use_fallback = True
                else:
                    gd = float(np.dot(g, d))
                    a = (gg * dAd - gd * gAd) / det
                    b = (-gd * gAg + gg * gAd) / det
            if use_fallback:
                if gAg <= 0:
                    raise UnsupportedProblemError("quadratic form is not positive along the gradient")
                a, b = gg / gAg, 0.0
            if rec.due(k):
                rec.record(k, x, ctr.value(x), grad_norm=gn, step_size=a)
            x_prev, x = x, x - a * g + b * d
            k += 1
    except OracleBudgetError:
        pass
    if f_last is None:
        f_last = ctr.value_final(x)
        rec.record(k, x, f_last, force=True)
    return rec.finish(status, x, f_last)
