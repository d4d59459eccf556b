"""Empirical convergence-rate fitting from traces.

Two models over the positive-gap rows of a tail window:

* ``sublinear``: least squares of log(gap) on log(iter); the estimate is
  p with gap ~ C / iter^p.
* ``geometric``: per-iteration contraction q = exp(mean log-ratio of
  consecutive gaps), i.e. gap ~ C q^iter.

Both are invariant to positive rescaling of the gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.oracles import Trace

MODELS = ("sublinear", "geometric")


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class RateFit:
    model: str
    estimate: float  # exponent p, or per-step ratio q
    r_squared: float
    window: float


def _r_squared(xs: np.ndarray, ys: np.ndarray, slope: float, intercept: float) -> float:
    resid = ys - (slope * xs + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(ys - ys.mean(), ys - ys.mean()))
    if ss_tot == 0.0:
        return 1.0
    return max(0.0, 1.0 - ss_res / ss_tot)


def fit_rate(trace: Trace, model: str, window: float = 0.5) -> RateFit:
    """Fit a rate model to the tail ``window`` fraction of a trace."""
    if model not in MODELS:
        raise ValueError(f"unknown rate model {model!r}; choose from {MODELS}")
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    rows = trace.rows
    n_tail = max(1, math.ceil(window * len(rows)))
    tail = rows[len(rows) - n_tail:]
    pts = [(r.iter, r.f_gap) for r in tail
           if r.f_gap is not None and r.f_gap > 0 and r.iter >= 1]
    if len(pts) < 10:
        raise InsufficientDataError(
            f"need >= 10 rows with positive f_gap in the window, got {len(pts)}")
    iters = np.array([p[0] for p in pts], dtype=float)
    logg = np.log(np.array([p[1] for p in pts]))

    if model == "sublinear":
        logk = np.log(iters)
        slope, intercept = np.polyfit(logk, logg, 1)
        return RateFit(model=model, estimate=float(-slope),
                       r_squared=_r_squared(logk, logg, slope, intercept),
                       window=window)

    # Geometric: the mean of consecutive per-iteration log ratios telescopes
    # to the endpoint slope; r^2 comes from the log-linear regression.
    q = math.exp((logg[-1] - logg[0]) / (iters[-1] - iters[0]))
    slope, intercept = np.polyfit(iters, logg, 1)
    return RateFit(model=model, estimate=float(q),
                   r_squared=_r_squared(iters, logg, slope, intercept),
                   window=window)
