"""Built-in problem catalog.

``make_problem(name, params, seed)`` returns an oracle suite with every
analytically known constant filled in, together with the problem's
feasible set.  Instances that need data (random linear systems, phase
retrieval, logistic regression) generate it deterministically from the
seed.

Subgradient selections at kinks are deterministic: the minimal-norm
element where it is cheap (``sign(0) = 0`` for absolute values), and the
lowest achieving index for max-type functions.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .oracles import ConstraintOracle, OracleSuite, QuadraticForm
from .rng import Rng
from .sets import Box, FeasibleSet, FullSpace


class UnknownProblemError(KeyError):
    pass


def _check_params(name: str, params: dict, allowed: set[str]):
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"problem {name!r}: unknown params {sorted(unknown)}; allowed: {sorted(allowed)}")


def _abs1d(params: dict, seed: int):
    _check_params("abs1d", params, set())

    def value(x):
        return abs(float(x[0]))

    def subgrad(x):
        return np.array([np.sign(x[0])])

    oracle = OracleSuite(
        value=value, subgrad=subgrad, dim=1,
        fstar=0.0, xstar=np.zeros(1), M=1.0, alpha_sharp=1.0,
    )
    return oracle, FullSpace(1), np.array([1.0])


def _l1_system(params: dict, seed: int):
    _check_params("l1_system", params, {"d", "m"})
    d = int(params.get("d", 5))
    m = int(params.get("m", 8))
    if m < d:
        raise ValueError("l1_system needs m >= d for a unique solution")
    rng = Rng(seed)
    A = rng.gaussian((m, d))
    x_true = rng.gaussian(d)
    b = A @ x_true

    def value(x):
        return float(np.sum(np.abs(A @ x - b)))

    def subgrad(x):
        return A.T @ np.sign(A @ x - b)

    sigma_min = float(np.linalg.svd(A, compute_uv=False)[-1])
    if sigma_min <= 0:
        raise ValueError("degenerate instance: smallest singular value is zero")
    row_norm_sum = float(np.sum(np.linalg.norm(A, axis=1)))
    oracle = OracleSuite(
        value=value, subgrad=subgrad, dim=d,
        fstar=0.0, xstar=x_true,
        # ||A u||_1 >= ||A u||_2 >= sigma_min ||u||_2 gives a valid (possibly
        # loose) sharp-minimum constant; row-norm sum bounds every subgradient.
        M=row_norm_sum, alpha_sharp=sigma_min,
    )
    return oracle, FullSpace(d), np.zeros(d)


def _norm2(params: dict, seed: int):
    _check_params("norm2", params, {"d", "a"})
    if "a" in params:
        a = np.asarray(params["a"], dtype=float)
        d = a.shape[0]
    else:
        d = int(params.get("d", 3))
        a = np.zeros(d)

    def value(x):
        return float(np.linalg.norm(x - a))

    def subgrad(x):
        z = x - a
        n = float(np.linalg.norm(z))
        return z / n if n > 0 else np.zeros(d)

    oracle = OracleSuite(
        value=value, subgrad=subgrad, dim=d,
        fstar=0.0, xstar=a.copy(), M=1.0, alpha_sharp=1.0,
    )
    return oracle, FullSpace(d), a + np.ones(d)


def _quad_diag(params: dict, seed: int):
    _check_params("quad_diag", params, {"lambdas", "shift"})
    lam = np.asarray(params.get("lambdas", [10.0, 1.0]), dtype=float)
    if lam.ndim != 1 or np.any(lam <= 0):
        raise ValueError("lambdas must be a 1-d array of positive numbers")
    d = lam.shape[0]
    a = np.asarray(params.get("shift", np.zeros(d)), dtype=float)
    if a.shape != (d,):
        raise ValueError("shift must match the dimension of lambdas")

    def value(x):
        z = x - a
        return 0.5 * float(np.dot(lam * z, z))

    def grad(x):
        return lam * (x - a)

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=d,
        fstar=0.0, xstar=a.copy(),
        L=float(np.max(lam)), mu=float(np.min(lam)),
        quadratic=QuadraticForm(matvec=lambda v: lam * v, b=lam * a),
    )
    return oracle, FullSpace(d), a + np.ones(d)


def _fw_box(params: dict, seed: int):
    _check_params("fw_box", params, set())

    def value(x):
        return float(x[0] ** 2 + (1.0 + x[1]) ** 2)

    def grad(x):
        return np.array([2.0 * x[0], 2.0 * (1.0 + x[1])])

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=2,
        fstar=1.0, xstar=np.zeros(2),
        L=2.0, mu=2.0, M=float(math.sqrt(20.0)),
    )
    return oracle, Box(np.array([-1.0, 0.0]), np.array([1.0, 1.0])), np.array([1.0, 1.0])


def _degenerate3(params: dict, seed: int):
    _check_params("degenerate3", params, {"l1", "l2"})
    l1 = float(params.get("l1", 1.0))
    l2 = float(params.get("l2", 0.1))
    if not l1 > l2 > 0:
        raise ValueError("degenerate3 requires l1 > l2 > 0")
    lam = np.array([l1, l2, 0.0])

    def value(x):
        return float(np.dot(lam * x, x))

    def grad(x):
        return 2.0 * lam * x

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=3,
        fstar=0.0, xstar=np.zeros(3),
        # f = l1 x1^2 + l2 x2^2 has Hessian 2 diag(l1,l2,0).
        L=2.0 * l1, mu=2.0 * l2,
        dist_fn=lambda x: float(math.hypot(x[0], x[1])),  # X* is the x3 axis
    )
    return oracle, FullSpace(3), np.zeros(3)


def _rosenbrock(params: dict, seed: int):
    _check_params("rosenbrock", params, set())

    def value(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    def grad(x):
        t = x[1] - x[0] ** 2
        return np.array([-400.0 * t * x[0] - 2.0 * (1.0 - x[0]), 200.0 * t])

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=2,
        fstar=0.0, xstar=np.array([1.0, 1.0]),
    )
    return oracle, FullSpace(2), np.array([-1.2, 1.0])


def _nesterov_skokov_toy(params: dict, seed: int):
    _check_params("nesterov_skokov_toy", params, set())

    def value(x):
        return float(0.5 * x[0] ** 2 + 0.25 * x[1] ** 4 - 0.5 * x[1] ** 2)

    def grad(x):
        return np.array([x[0], x[1] ** 3 - x[1]])

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=2,
        fstar=-0.25, xstar=np.array([0.0, 1.0]),
        minimizers=(np.array([0.0, 1.0]), np.array([0.0, -1.0])),
        L=2.0,  # |d^2f/dx2^2| = |3 x2^2 - 1| <= 2 on the GD-invariant band |x2| <= 1
    )
    return oracle, FullSpace(2), np.array([1.0, 0.0])


def _phase_retrieval(params: dict, seed: int):
    _check_params("phase_retrieval", params, {"m", "n"})
    m = int(params.get("m", 25))
    n = int(params.get("n", 5))
    rng = Rng(seed)
    A = rng.gaussian((m, n))
    xs = rng.gaussian(n)
    xs = xs / np.linalg.norm(xs)
    b = (A @ xs) ** 2  # noiseless measurements: f* = 0 with a sharp minimum

    def value(x):
        return float(np.mean(np.abs((A @ x) ** 2 - b)))

    def subgrad(x):
        ax = A @ x
        return (2.0 / m) * (A.T @ (np.sign(ax ** 2 - b) * ax))

    weak_mu = 2.0 * float(np.max(np.sum(A * A, axis=1)))
    oracle = OracleSuite(
        value=value, subgrad=subgrad, dim=n,
        fstar=0.0, xstar=xs, minimizers=(xs, -xs),
        mu=weak_mu,  # weak-convexity modulus, 2 max_i ||a_i||^2
    )
    x0 = xs + 0.1 * rng.sphere(n)
    return oracle, FullSpace(n), x0


def _slp(params: dict, seed: int):
    _check_params("slp", params, {"rho"})
    rho = float(params.get("rho", 1.0))
    if rho <= 0:
        raise ValueError("rho must be positive")
    angles = np.pi * np.arange(20) / 10.0
    C = rho * np.stack([np.cos(angles), np.sin(angles)], axis=1)  # rows: constraint gradients

    def value(x):
        return -float(x[0])

    def subgrad(x):
        return np.array([-1.0, 0.0])

    def g_value(x):
        return float(np.max(C @ x - rho))

    def g_subgrad(x):
        rows = C @ x - rho
        return C[int(np.argmax(rows))].copy()  # lowest achieving index on ties

    # The optimal face is the segment {1} x [-tan(pi/20), tan(pi/20)].
    half_edge = math.tan(math.pi / 20.0)

    def dist_fn(x):
        t = min(max(float(x[1]), -half_edge), half_edge)
        return float(math.hypot(x[0] - 1.0, x[1] - t))

    oracle = OracleSuite(
        value=value, subgrad=subgrad, grad=subgrad, dim=2,
        fstar=-1.0, xstar=np.array([1.0, 0.0]), dist_fn=dist_fn,
        M=1.0, alpha_sharp=rho / 2.0,
        constraint=ConstraintOracle(value=g_value, subgrad=g_subgrad, lipschitz=rho),
    )
    return oracle, FullSpace(2), np.zeros(2)


def _logistic_small(params: dict, seed: int):
    _check_params("logistic_small", params, {"n", "d", "box_radius"})
    n = int(params.get("n", 20))
    d = int(params.get("d", 3))
    r = float(params.get("box_radius", 2.0))
    rng = Rng(seed)
    A = rng.gaussian((n, d))
    w = rng.gaussian(d)
    b = np.sign(A @ w)
    b[b == 0] = 1.0

    def value(x):
        return float(np.sum(np.logaddexp(0.0, b * (A @ x))))

    def grad(x):
        s = 1.0 / (1.0 + np.exp(-b * (A @ x)))
        return A.T @ (b * s)

    oracle = OracleSuite(
        value=value, subgrad=grad, grad=grad, dim=d,
        L=0.25 * float(np.linalg.norm(A, 2)) ** 2,
        M=float(np.sum(np.linalg.norm(A, axis=1))),
    )
    return oracle, Box(-r * np.ones(d), r * np.ones(d)), np.zeros(d)


_CATALOG: dict[str, tuple[Callable, str]] = {
    "abs1d": (_abs1d, "f = |x| on R; sharp minimum at 0"),
    "l1_system": (_l1_system, "f = sum_i |<a_i,x> - b_i| for a consistent system (params d, m)"),
    "norm2": (_norm2, "f = ||x - a||_2; sharp minimum at a (params d or a)"),
    "quad_diag": (_quad_diag, "f = 0.5 sum_i lam_i (x_i - a_i)^2 (params lambdas, shift)"),
    "fw_box": (_fw_box, "f = x1^2 + (1+x2)^2 on [-1,1]x[0,1]"),
    "degenerate3": (_degenerate3, "f = <Ax,x>, A = diag(l1,l2,0); PL but not strongly convex"),
    "rosenbrock": (_rosenbrock, "f = 100(x2-x1^2)^2 + (1-x1)^2"),
    "nesterov_skokov_toy": (_nesterov_skokov_toy, "f = x1^2/2 + x2^4/4 - x2^2/2; saddle at origin"),
    "phase_retrieval": (_phase_retrieval, "f = mean_i |<a_i,x>^2 - b_i|, planted +-x*, f*=0 (params m, n)"),
    "slp": (_slp, "f = -x1 with 20 tangent half-plane constraints as max-type g (param rho)"),
    "logistic_small": (_logistic_small, "logistic loss on a compact box (params n, d, box_radius)"),
}


def problem_names() -> list[str]:
    return sorted(_CATALOG)


def problem_doc(name: str) -> str:
    return _CATALOG[name][1]


def make_problem(name: str, params: Optional[dict] = None, seed: int = 0) -> tuple[OracleSuite, FeasibleSet]:
    """Instantiate a catalog problem. Raises UnknownProblemError for bad names."""
    oracle, fset, _ = _build(name, params, seed)
    return oracle, fset


def default_x0(name: str, params: Optional[dict] = None, seed: int = 0) -> np.ndarray:
    """The documented default starting point of a catalog problem."""
    _, _, x0 = _build(name, params, seed)
    return x0


def _build(name: str, params: Optional[dict], seed: int):
    if name not in _CATALOG:
        raise UnknownProblemError(f"unknown problem {name!r}; available: {', '.join(problem_names())}")
    builder, _ = _CATALOG[name]
    return builder(dict(params or {}), int(seed))
