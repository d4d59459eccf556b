"""Noise models applied as oracle decorators.

Each wrapper returns a new :class:`OracleSuite` whose perturbed entries
satisfy the declared bound on every call:

* absolute gradient noise:   ||g~ - g|| <= delta
* relative gradient noise:   ||g~ - g|| <= alpha * ||g||
* additive stochastic gradient noise with scale sigma
* bounded zeroth-order value noise:  |f~ - f| <= delta
* stochastic zeroth-order value noise with E[xi^2] <= delta_tilde^2

Gradient noise replaces both ``grad`` and ``subgrad`` (consistently);
value noise replaces only the zeroth-order entry, so traces still report
the true objective.  A wrapped suite that draws its own randomness
(absolute noise in random-direction mode) holds the ``Rng`` passed to
``wrap_noise``; create one wrapper per run for independent streams.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .oracles import OracleSuite
from .rng import Rng


class NoiseCompatibilityError(TypeError):
    """The oracle lacks the entry this noise model perturbs."""


@dataclass(frozen=True)
class NoNoise:
    pass


@dataclass(frozen=True)
class AbsoluteGrad:
    """Additive gradient perturbation with ||v(x)||_2 <= delta."""

    delta: float
    mode: str = "random_direction"  # or "fixed"
    v: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.mode not in ("fixed", "random_direction"):
            raise ValueError(f"unknown AbsoluteGrad mode {self.mode!r}")
        if self.mode == "fixed":
            if self.v is None:
                raise ValueError("fixed mode requires the perturbation vector v")
            v = np.asarray(self.v, dtype=float)
            if np.linalg.norm(v) > self.delta + 1e-12:
                raise ValueError("||v|| must not exceed delta")
            object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class RelativeGrad:
    """Multiplicative gradient perturbation with ||g~ - g|| <= alpha ||g||."""

    alpha: float
    mode: str = "shrink"  # "shrink" | "grow" | "random_direction"

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must lie in [0, 1)")
        if self.mode not in ("shrink", "grow", "random_direction"):
            raise ValueError(f"unknown RelativeGrad mode {self.mode!r}")


@dataclass(frozen=True)
class AdditiveStochGrad:
    """Stochastic gradient g(x) + sigma * xi with i.i.d. noise per call."""

    sigma: float
    distribution: str = "gaussian"  # or "student_t3" (heavy tails, Var = 3 sigma^2)

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.distribution not in ("gaussian", "student_t3"):
            raise ValueError(f"unknown distribution {self.distribution!r}")


@dataclass(frozen=True)
class ZOBoundedValue:
    """Adversarial bounded value noise |delta(x)| <= delta for the ZO oracle."""

    delta: float
    mode: str = "deterministic_worst"  # or "random"

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.mode not in ("deterministic_worst", "random"):
            raise ValueError(f"unknown ZOBoundedValue mode {self.mode!r}")


@dataclass(frozen=True)
class ZOStochValue:
    """Stochastic value noise with E[xi^2] <= delta_tilde^2 (gaussian)."""

    delta_tilde: float

    def __post_init__(self):
        if self.delta_tilde < 0:
            raise ValueError("delta_tilde must be >= 0")


NoiseSpec = NoNoise | AbsoluteGrad | RelativeGrad | AdditiveStochGrad | ZOBoundedValue | ZOStochValue


def _absolute_grad(oracle: OracleSuite, noise: AbsoluteGrad, rng: Rng):
    base = oracle.grad
    delta, d = noise.delta, oracle.dim
    if noise.mode == "fixed":
        v = noise.v  # ||v|| <= delta enforced at construction

        def noisy(x):
            return base(x) + v
    else:
        def noisy(x):
            v = delta * rng.sphere(d)
            assert np.linalg.norm(v) <= delta * (1 + 1e-12)
            return base(x) + v
    return noisy


def _relative_grad(oracle: OracleSuite, noise: RelativeGrad, rng: Rng):
    base = oracle.grad
    alpha, d = noise.alpha, oracle.dim
    if noise.mode == "shrink":
        def noisy(x):
            return (1.0 - alpha) * base(x)
    elif noise.mode == "grow":
        def noisy(x):
            return (1.0 + alpha) * base(x)
    else:
        def noisy(x):
            g = base(x)
            gn = float(np.linalg.norm(g))
            out = g + alpha * gn * rng.sphere(d)
            assert np.linalg.norm(out - g) <= alpha * gn * (1 + 1e-12) + 1e-300
            return out
    return noisy


def wrap_noise(oracle: OracleSuite, noise: NoiseSpec, rng: Rng) -> OracleSuite:
    """Decorate ``oracle`` with the given noise model.

    The returned suite is deterministic given ``rng``'s seed; the noise
    model's bound holds on every perturbed call.
    """
    if isinstance(noise, NoNoise):
        return oracle

    if isinstance(noise, (AbsoluteGrad, RelativeGrad)):
        if oracle.grad is None:
            raise NoiseCompatibilityError("gradient noise requires an oracle with grad")
        if isinstance(noise, AbsoluteGrad):
            noisy = _absolute_grad(oracle, noise, rng)
        else:
            noisy = _relative_grad(oracle, noise, rng)
        return replace(oracle, grad=noisy, subgrad=noisy)

    if isinstance(noise, AdditiveStochGrad):
        if oracle.grad is None:
            raise NoiseCompatibilityError("stochastic gradient noise requires an oracle with grad")
        base = oracle.grad
        sigma, d = noise.sigma, oracle.dim
        if noise.distribution == "gaussian":
            def sg(x, rng_):
                return base(x) + sigma * rng_.gaussian(d)
        else:
            def sg(x, rng_):
                return base(x) + sigma * rng_.student_t(3, d)
        return replace(oracle, stoch_grad=sg)

    if isinstance(noise, ZOBoundedValue):
        base_value = oracle.value
        delta = noise.delta
        if noise.mode == "deterministic_worst":
            # Sign noise along a fixed random hyperplane: the two probe points
            # of a symmetric difference land on opposite sides near the
            # minimizer, the worst case for two-point estimators.
            w = rng.sphere(oracle.dim)

            def zo(x, rng_):
                return base_value(x) + (delta if float(np.dot(w, x)) >= 0 else -delta)
        else:
            def zo(x, rng_):
                return base_value(x) + delta * float(rng_.uniform(-1.0, 1.0))
        return replace(oracle, zo_value=zo)

    if isinstance(noise, ZOStochValue):
        base_value = oracle.value
        dt = noise.delta_tilde

        def zo(x, rng_):
            return base_value(x) + dt * float(rng_.gaussian())

        return replace(oracle, zo_value=zo)

    raise TypeError(f"unknown noise spec {noise!r}")
