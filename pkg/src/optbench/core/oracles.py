"""Oracle bundles, call counting and run traces.

An :class:`OracleSuite` packages everything a method may ask about an
objective: values, a subgradient selection, the gradient when it exists,
a stochastic gradient, a (possibly noisy) zeroth-order value, plus the
analytically known constants of the instance (Lipschitz constants, the
gradient-domination constant, the optimal value and a minimizer).

Suites are treated as immutable after construction.  Runs that need
randomness receive their own :class:`~optbench.core.rng.Rng`, and every
run wraps the suite in its own :class:`CountingOracle`, so concurrent
runs over one suite never interfere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class OracleBudgetError(RuntimeError):
    """Raised when a call would exceed the run's oracle-call budget."""


class ZeroSubgradientError(RuntimeError):
    """A zero subgradient was returned away from the optimum."""


class UnsupportedProblemError(TypeError):
    """The oracle lacks a structure required by the method."""


@dataclass(frozen=True)
class QuadraticForm:
    """Structure access for f(x) = 0.5 x'Ax - b'x (+ const): A-products and b."""

    matvec: Callable[[np.ndarray], np.ndarray]
    b: np.ndarray


@dataclass(frozen=True)
class ConstraintOracle:
    """Functional constraint g(x) <= 0 with a subgradient selection and Lipschitz bound."""

    value: Callable[[np.ndarray], float]
    subgrad: Callable[[np.ndarray], np.ndarray]
    lipschitz: Optional[float] = None


@dataclass(frozen=True)
class OracleSuite:
    value: Callable[[np.ndarray], float]
    subgrad: Callable[[np.ndarray], np.ndarray]
    dim: int
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    stoch_grad: Optional[Callable[[np.ndarray, object], np.ndarray]] = None
    zo_value: Optional[Callable[[np.ndarray, object], float]] = None
    fstar: Optional[float] = None
    xstar: Optional[np.ndarray] = None
    minimizers: Optional[Sequence[np.ndarray]] = None
    dist_fn: Optional[Callable[[np.ndarray], float]] = None
    L: Optional[float] = None
    M: Optional[float] = None
    mu: Optional[float] = None
    alpha_sharp: Optional[float] = None
    constraint: Optional[ConstraintOracle] = None
    quadratic: Optional[QuadraticForm] = None

    def dist_to_opt(self, x: np.ndarray) -> Optional[float]:
        """Distance to the known minimizer set, None when unknown."""
        if self.dist_fn is not None:
            return float(self.dist_fn(x))
        if self.minimizers is not None:
            return min(float(np.linalg.norm(x - m)) for m in self.minimizers)
        if self.xstar is not None:
            return float(np.linalg.norm(x - self.xstar))
        return None

    def zo_value_or_exact(self, x: np.ndarray, rng) -> float:
        if self.zo_value is not None:
            return float(self.zo_value(x, rng))
        return float(self.value(x))


class CountingOracle:
    """Per-run view of a suite that counts oracle calls and enforces a budget.

    ``value_final`` is exempt from the budget: it is used once to record
    the terminal trace row, so a run's total never exceeds the budget by
    more than one evaluation.
    """

    def __init__(self, suite: OracleSuite, max_calls: Optional[int] = None,
                 constraint: Optional[ConstraintOracle] = None):
        self.suite = suite
        self.constraint = constraint if constraint is not None else suite.constraint
        self.max_calls = max_calls
        self.calls = 0

    def _tick(self):
        if self.max_calls is not None and self.calls >= self.max_calls:
            raise OracleBudgetError(f"oracle budget of {self.max_calls} calls exhausted")
        self.calls += 1

    def count_extra(self):
        """Count one oracle access made outside the suite's entries (e.g. an A-product)."""
        self._tick()

    def value(self, x) -> float:
        self._tick()
        return float(self.suite.value(x))

    def value_final(self, x) -> float:
        self.calls += 1
        return float(self.suite.value(x))

    def subgrad(self, x) -> np.ndarray:
        self._tick()
        return np.asarray(self.suite.subgrad(x), dtype=float)

    def grad(self, x) -> np.ndarray:
        if self.suite.grad is None:
            raise UnsupportedProblemError("oracle has no gradient entry")
        self._tick()
        return np.asarray(self.suite.grad(x), dtype=float)

    def stoch_grad(self, x, rng) -> np.ndarray:
        if self.suite.stoch_grad is None:
            raise UnsupportedProblemError("oracle has no stochastic gradient entry")
        self._tick()
        return np.asarray(self.suite.stoch_grad(x, rng), dtype=float)

    def zo_value(self, x, rng) -> float:
        self._tick()
        return self.suite.zo_value_or_exact(x, rng)

    def constraint_value(self, x) -> float:
        self._tick()
        return float(self.constraint.value(x))

    def constraint_subgrad(self, x) -> np.ndarray:
        self._tick()
        return np.asarray(self.constraint.subgrad(x), dtype=float)


class RunStatus(enum.Enum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"
    EARLY_STOPPED = "early_stopped"
    DIVERGED = "diverged"


@dataclass
class TraceRow:
    iter: int
    f_value: float
    f_gap: Optional[float]
    dist_to_opt: Optional[float]
    grad_norm: Optional[float]
    step_size: float
    oracle_calls: int
    x: Optional[np.ndarray] = None
    tag: Optional[str] = None


@dataclass
class Trace:
    rows: list[TraceRow]
    status: Optional[RunStatus]
    x_out: Optional[np.ndarray] = None
    f_out: Optional[float] = None

    @property
    def final(self) -> TraceRow:
        return self.rows[-1]

    def iters(self) -> np.ndarray:
        return np.array([r.iter for r in self.rows])

    def gaps(self) -> np.ndarray:
        return np.array([math.nan if r.f_gap is None else r.f_gap for r in self.rows])

    def dists(self) -> np.ndarray:
        return np.array([math.nan if r.dist_to_opt is None else r.dist_to_opt for r in self.rows])


class TraceRecorder:
    """Accumulates trace rows for one run.

    Rows are kept every ``record_every`` iterations; the first and the
    terminal row are always kept.  ``f_gap`` is filled from the suite's
    known optimal value and ``dist_to_opt`` from its minimizer set.
    """

    def __init__(self, suite: OracleSuite, counter: CountingOracle,
                 record_every: int = 1, record_x: bool = False):
        if record_every < 1:
            raise ValueError("record_every must be >= 1")
        self.suite = suite
        self.counter = counter
        self.record_every = record_every
        self.record_x = record_x
        self.rows: list[TraceRow] = []

    def due(self, it: int) -> bool:
        return it % self.record_every == 0

    def record(self, it: int, x: np.ndarray, f_value: float,
               grad_norm: Optional[float] = None, step_size: float = 0.0,
               tag: Optional[str] = None, force: bool = False):
        if not (force or self.due(it)):
            return
        if self.rows and self.rows[-1].iter == it:
            return
        fstar = self.suite.fstar
        self.rows.append(TraceRow(
            iter=it,
            f_value=float(f_value),
            f_gap=None if fstar is None else float(f_value) - fstar,
            dist_to_opt=self.suite.dist_to_opt(x),
            grad_norm=None if grad_norm is None else float(grad_norm),
            step_size=float(step_size),
            oracle_calls=self.counter.calls,
            x=np.array(x, dtype=float) if self.record_x else None,
            tag=tag,
        ))

    def finish(self, status: RunStatus, x_out: np.ndarray, f_out: Optional[float] = None) -> Trace:
        return Trace(rows=self.rows, status=status,
                     x_out=np.array(x_out, dtype=float),
                     f_out=None if f_out is None else float(f_out))
