"""Acceptance suite.

Each test verifies one top-level criterion at its stated tolerance and
prints one PASS/FAIL line (run with ``pytest -s`` to see them inline).
"""

import json
import math

import numpy as np
import pytest

from optbench.bench import fit_rate, parse_config, run_experiment
from optbench.core import (
    AbsoluteGrad,
    AdditiveStochGrad,
    Box,
    OracleSuite,
    RelativeGrad,
    Rng,
    RunStatus,
    make_problem,
    wrap_noise,
)
from optbench.frankwolfe import Classic, FwConfig, ShortStep, run_fw
from optbench.momentum import (
    MomentumConfig,
    chebyshev_delta_limit,
    chebyshev_delta_sequence,
    run_cg_quadratic,
    run_momentum,
)
from optbench.smooth import (
    AbsNoise,
    RelNoise,
    RelNoiseAdaptive,
    SmoothRunConfig,
    run_gd,
    run_gd_abs,
    run_gd_rel,
    run_gd_rel_adaptive,
)
from optbench.stochastic import Const, Decay, SgdConfig, UniformAvg, monte_carlo_mean_cov, run_sgd
from optbench.subgrad import (
    FixedStep,
    PolyakStep,
    SubgradConfig,
    SwitchingConfig,
    run_const_subgrad,
    run_polyak_subgrad,
    run_restarted_switching,
)
from optbench.zeroorder import build_kernel, kernel_grad_estimate


class criterion:
    """Prints '[PASS|FAIL] criterion N: label' when the block exits."""

    def __init__(self, num, label):
        self.num, self.label = num, label

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{status}] criterion {self.num}: {self.label}")
        return False


def test_criterion_01_polyak_sharp_geometric_rate():
    with criterion(1, "Polyak-step geometric rate on l1_system under the analytic "
                      "sharpness and Lipschitz constants"):
        oracle, fset = make_problem("l1_system", {"d": 5, "m": 8}, seed=1)
        x0 = oracle.xstar + Rng(100).gaussian(5)
        tr = run_polyak_subgrad(oracle, fset, x0,
                                SubgradConfig(step_rule=PolyakStep(), N=300))
        factor = 1.0 - (oracle.alpha_sharp / oracle.M) ** 2
        d0 = tr.rows[0].dist_to_opt
        assert len(tr.rows) > 10
        for r in tr.rows:
            assert r.dist_to_opt ** 2 <= factor ** r.iter * d0 ** 2 * (1 + 1e-9) + 1e-300


def test_criterion_02_constant_step_cycle_and_averaging():
    with criterion(2, "constant-step two-point cycle on |x| and O(1/N) averaged point"):
        oracle, fset = make_problem("abs1d")
        for N in (6, 25, 100):
            cfg = SubgradConfig(step_rule=FixedStep(0.02), N=N, averaging=True)
            tr = run_const_subgrad(oracle, fset, np.array([-0.01]), cfg, record_x=True)
            xs = [r.x[0] for r in tr.rows]
            assert xs == [(-0.01 if k % 2 == 0 else 0.01) for k in range(N)]
            assert abs(tr.x_out[0]) <= 2.0 / N


def test_criterion_03_switching_restarts_on_slp():
    with criterion(3, "restarted switching reaches dist <= 0.05 on slp(1) within "
                      "the stated subgradient-call budget"):
        oracle, fset = make_problem("slp", {"rho": 1.0})
        alpha, eps, theta0 = 0.5, 0.05, 1.0
        cfg = SwitchingConfig(theta0=theta0, eps_target=eps, alpha_sharp=alpha,
                              max_iters=100_000)
        x_out, tr = run_restarted_switching(oracle, None, fset, np.zeros(2), cfg)
        assert np.linalg.norm(x_out - np.array([1.0, 0.0])) <= eps
        budget = (math.ceil(4 * max(1, oracle.M ** 2)
                            * max(1, oracle.constraint.lipschitz ** 2) / alpha ** 2)
                  * math.ceil(2 * math.log2(theta0 / eps)))
        assert tr.rows[-1].iter <= budget  # iterations == subgradient calls


def test_criterion_04_pl_rate_exact():
    with criterion(4, "gradient descent PL rate on quad_diag([10,1]) matches the "
                      "closed-form iterate to 1e-12"):
        oracle, _ = make_problem("quad_diag", {"lambdas": [10.0, 1.0]})
        tr = run_gd(oracle, np.array([1.0, 1.0]), SmoothRunConfig(N=200, tol=0.0),
                    record_x=True)
        gap0 = tr.rows[0].f_gap
        assert tr.rows[-1].iter == 200
        for r in tr.rows:
            assert r.f_gap <= 0.9 ** r.iter * gap0 * (1 + 1e-12)
            closed = np.array([0.0 ** r.iter if r.iter else 1.0, 0.9 ** r.iter])
            np.testing.assert_allclose(r.x, closed, atol=1e-12)


def test_criterion_05_absolute_noise_divergence_early_stop_plateau():
    with criterion(5, "absolute-noise linear escape, early stop at the minimizer, "
                      "and the Delta^2/(2 mu) plateau bound over 100 seeds"):
        base, _ = make_problem("degenerate3", {"l1": 1.0, "l2": 0.1})
        noisy = wrap_noise(base, AbsoluteGrad(0.1, mode="fixed", v=np.array([0.0, 0.0, 0.1])),
                           Rng(0))
        # escape at exactly k Delta / L per step with early stopping off
        cfg = SmoothRunConfig(N=200, mode=AbsNoise(delta=0.1, stop_multiplier=0.0), tol=0.0)
        tr = run_gd_abs(noisy, np.zeros(3), cfg, record_x=True)
        for r in tr.rows:
            assert np.linalg.norm(r.x) == pytest.approx(r.iter * 0.1 / 2.0, abs=1e-12)
        # with c = 2 the run stops immediately at the minimizer
        cfg = SmoothRunConfig(N=200, mode=AbsNoise(delta=0.1, stop_multiplier=2.0))
        tr = run_gd_abs(noisy, np.zeros(3), cfg)
        assert tr.status is RunStatus.EARLY_STOPPED and tr.final.iter == 0
        assert np.array_equal(tr.x_out, np.zeros(3))
        # plateau bound under random-direction noise: no violations in 100 seeds
        quad, _ = make_problem("quad_diag", {"lambdas": [10.0, 1.0]})
        delta, mu, L = 0.1, 1.0, 10.0
        violations = 0
        for seed in range(100):
            noisy = wrap_noise(quad, AbsoluteGrad(delta), Rng(seed))
            cfg = SmoothRunConfig(N=150, mode=AbsNoise(delta=delta, stop_multiplier=0.0),
                                  tol=0.0)
            tr = run_gd_abs(noisy, np.array([1.0, 1.0]), cfg)
            gap0 = tr.rows[0].f_gap
            for r in tr.rows:
                bound = (1 - mu / L) ** r.iter * gap0 + delta ** 2 / (2 * mu)
                if r.f_gap > bound * (1 + 1e-12):
                    violations += 1
        assert violations == 0


def test_criterion_06_relative_noise_rate_bounds():
    with criterion(6, "relative-noise fixed and adaptive rate factors are upper "
                      "bounds on quad_diag under the shrink adversary"):
        oracle, _ = make_problem("quad_diag", {"lambdas": [4.0, 1.0]})
        L, mu, x0 = 4.0, 1.0, np.array([1.0, 1.0])
        for alpha in (0.0, 0.1, 0.25, 0.4):
            noisy = wrap_noise(oracle, RelativeGrad(alpha, mode="shrink"), Rng(0))
            cfg = SmoothRunConfig(N=60, mode=RelNoise(alpha=alpha), tol=0.0)
            tr = run_gd_rel(noisy, x0, cfg)
            gap0 = tr.rows[0].f_gap
            factor = 1 - (mu / L) * (1 - alpha) ** 2 / (1 + alpha) ** 2
            for r in tr.rows:
                assert r.f_gap <= factor ** r.iter * gap0 * (1 + 1e-9)
        for alpha in (0.0, 0.1, 0.25):
            noisy = wrap_noise(oracle, RelativeGrad(alpha, mode="shrink"), Rng(0))
            cfg = SmoothRunConfig(N=60, mode=RelNoiseAdaptive(alpha=alpha, L0=L), tol=0.0)
            tr = run_gd_rel_adaptive(noisy, x0, cfg)
            gap0 = tr.rows[0].f_gap
            factor = 1 - (mu / (2 * L)) * (1 - 2 * alpha) ** 2
            for r in tr.rows:
                assert r.f_gap <= factor ** r.iter * gap0 * (1 + 1e-9)


def test_criterion_07_fw_4_over_n_example():
    with criterion(7, "classic-step conditional gradient reproduces the stated "
                      "~4/N gap scaling on the box example"):
        oracle, fset = make_problem("fw_box")
        x0 = np.array([1.0, 1.0])
        gapN = {}
        for N in (100, 200, 400):
            tr = run_fw(oracle, fset, x0, FwConfig(N=N, step_rule=Classic()))
            gapN[N] = tr.f_out - oracle.fstar
        tr = run_fw(oracle, fset, x0, FwConfig(N=400, step_rule=Classic()))
        fit = fit_rate(tr, "sublinear", window=0.5)
        # short-step one-shot sanity: exact minimizer in one step
        quad, _ = make_problem("quad_diag", {"lambdas": [1.0, 1.0]})
        box = Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        one = run_fw(quad, box, np.array([1.0, 1.0]),
                     FwConfig(N=2, step_rule=ShortStep(L=1.0)))
        np.testing.assert_allclose(one.x_out, np.zeros(2), atol=1e-15)
        # the stated scaling: gap * N within [2, 8] and a ~1/N sublinear fit.
        # Measured behavior of the 2/(k+1) schedule on this instance is
        # ~1/N^2 (gap*N ~ 0.01, p ~ 2), so this clause fails; see the
        # assertion message for the measured numbers.
        assert all(2.0 <= g * N <= 8.0 for N, g in gapN.items()) \
            and 0.8 <= fit.estimate <= 1.2, (
            f"classic-step measurements: gap*N = "
            f"{ {N: round(g * N, 5) for N, g in gapN.items()} }, "
            f"sublinear exponent p = {fit.estimate:.3f} (r2 = {fit.r_squared:.4f}); "
            f"the open-loop 2/(k+1) schedule decays ~1/N^2 here, while the "
            f"stated ~4/N behavior belongs to the line-search/short step "
            f"(measured f-gap*N -> 1.0, duality-gap*N -> 2.0)")


def test_criterion_08_acceleration_evidence():
    with criterion(8, "Chebyshev/Nesterov beat GD by >= 5x at kappa = 400; delta_k "
                      "limit reached; CG exact in d steps"):
        oracle, _ = make_problem("quad_diag", {"lambdas": [400.0, 1.0]})
        x0 = np.array([1.0, 1.0])

        def iters_to(trace, tol):
            for r in trace.rows:
                if r.f_gap is not None and r.f_gap <= tol:
                    return r.iter
            return None

        gd = run_gd(oracle, x0, SmoothRunConfig(N=20000, tol=0.0))
        k_gd = iters_to(gd, 1e-9)
        for variant in ("chebyshev", "nesterov_sc"):
            tr = run_momentum(oracle, x0, MomentumConfig(variant, N=5000, tol=0.0))
            k_acc = iters_to(tr, 1e-9)
            assert k_acc is not None and k_gd / k_acc >= 5.0

        # the fixed-point iteration contracts at rate delta_inf^2 (~0.82 at
        # kappa = 400), so 1e-10 agreement needs ~130 steps here
        deltas = chebyshev_delta_sequence(400.0, 1.0, 200)
        assert abs(deltas[-1] - chebyshev_delta_limit(400.0, 1.0)) <= 1e-10

        lam = np.sort(Rng(8).uniform(1.0, 100.0, size=5))
        quad, _ = make_problem("quad_diag", {"lambdas": lam.tolist()})
        cg = run_cg_quadratic(quad, Rng(9).gaussian(5), N=5)
        assert np.linalg.norm(quad.grad(cg.x_out)) <= 1e-8


def test_criterion_09_sgd_stationary_variance_and_bound():
    with criterion(9, "constant-step SGD stationary variance matches the closed "
                      "form within 10% and the mean-square bound holds"):
        oracle, fset = make_problem("quad_diag", {"lambdas": [1.0]})
        noisy = wrap_noise(oracle, AdditiveStochGrad(1.0), Rng(0))
        gamma = 0.25
        tr = run_sgd(noisy, fset, np.array([1.0]),
                     SgdConfig(N=100_000, step_rule=Const(gamma)), Rng(1))
        dist2 = np.array([r.dist_to_opt ** 2 for r in tr.rows[5000:]])
        target = gamma * 1.0 / (1.0 * (2 - gamma * 1.0))  # = 1/7
        assert float(np.mean(dist2)) == pytest.approx(target, rel=0.10)

        finals = []
        for seed in range(100):
            t = run_sgd(noisy, fset, np.array([1.0]),
                        SgdConfig(N=200, step_rule=Const(gamma)), Rng(500 + seed),
                        record_every=200)
            finals.append(t.final.dist_to_opt ** 2)
        bound = 1.0 * (1 - gamma) ** 200 + 2 * gamma * 1.0 / 1.0
        assert float(np.mean(finals)) <= bound


def test_criterion_10_polyak_ruppert_clt_covariance():
    with criterion(10, "averaged-SGD covariance matches H^-1 Sigma H^-1: 1-d "
                       "within 25%, 2-d within 30% (N = 1e4, 200 replicas)"):
        N = 10_000

        def replica_1d(rng):
            oracle, fset = make_problem("quad_diag", {"lambdas": [1.0]})
            noisy = wrap_noise(oracle, AdditiveStochGrad(1.0), rng.spawn(0))
            cfg = SgdConfig(N=N, step_rule=Decay(gamma0=0.5, eta=0.6),
                            averaging=UniformAvg())
            return run_sgd(noisy, fset, np.zeros(1), cfg, rng.spawn(1),
                           record_every=N + 1).x_out

        stats = monte_carlo_mean_cov(replica_1d, replicas=200, seed=0)
        assert N * stats.covariance[0, 0] == pytest.approx(1.0, rel=0.25)

        def replica_2d(rng):
            oracle, fset = make_problem("quad_diag", {"lambdas": [2.0, 1.0]})
            noisy = wrap_noise(oracle, AdditiveStochGrad(1.0), rng.spawn(0))
            cfg = SgdConfig(N=N, step_rule=Decay(gamma0=0.5, eta=0.6),
                            averaging=UniformAvg())
            return run_sgd(noisy, fset, np.zeros(2), cfg, rng.spawn(1),
                           record_every=N + 1).x_out

        stats2 = monte_carlo_mean_cov(replica_2d, replicas=200, seed=1)
        limit = np.diag([1.0 / 4.0, 1.0])  # H^-1 Sigma H^-1 for H = diag(2,1), Sigma = I
        assert N * stats2.covariance[0, 0] == pytest.approx(limit[0, 0], rel=0.30)
        assert N * stats2.covariance[1, 1] == pytest.approx(limit[1, 1], rel=0.30)
        assert abs(N * stats2.covariance[0, 1]) <= 0.30 * math.sqrt(limit[0, 0] * limit[1, 1])


def test_criterion_11_kernel_estimator():
    with criterion(11, "kernel moment conditions to 1e-10, unbiasedness on linear "
                       "objectives (3 sigma), and the O(tau) bias ladder for beta=2"):
        for beta in (2, 3, 4, 5):
            k = build_kernel(beta)
            assert abs(k.moment(0)) <= 1e-10
            assert abs(k.moment(1) - 1.0) <= 1e-10
            for j in range(2, beta):
                assert abs(k.moment(j)) <= 1e-10
            assert math.isfinite(k.kappa_beta)

        c = np.array([1.0, -2.0, 0.5])
        lin = OracleSuite(value=lambda x: float(c @ x), subgrad=lambda x: c.copy(),
                          grad=lambda x: c.copy(), dim=3)
        kernel = build_kernel(2)
        rng = Rng(0)
        chunks = np.stack([kernel_grad_estimate(lin, np.zeros(3), 0.1, kernel, rng, 1000)
                           for _ in range(100)])
        mean = chunks.mean(axis=0)
        se = chunks.std(axis=0, ddof=1) / math.sqrt(len(chunks))
        for i in range(3):
            assert abs(mean[i] - c[i]) <= 3 * se[i]

        # bias ladder on a C^{1,1} objective (quadratics are estimated exactly,
        # so the O(tau^{beta-1}) floor needs a merely Lipschitz gradient)
        def value(x):
            return 0.5 * float(x @ x) + float(x[0]) * abs(float(x[0]))

        kinked = OracleSuite(value=value, subgrad=lambda x: x, dim=2)
        coef = 2.0 * 0.75 * 4.0 / (3.0 * math.pi)  # d E[r|r|K] E[|e1|^3] in d = 2
        biases = []
        for tau in (0.4, 0.2, 0.1, 0.05):
            est = kernel_grad_estimate(kinked, np.zeros(2), tau, kernel, Rng(9), 120_000)
            biases.append(abs(est[0]))
            assert biases[-1] / (coef * tau) == pytest.approx(1.0, rel=0.5)
        assert all(b2 < b1 for b1, b2 in zip(biases, biases[1:]))


def test_criterion_12_end_to_end_determinism(tmp_path):
    with criterion(12, "acceptance-style runs repeated with equal seeds produce "
                       "byte-identical trace files"):
        configs = [
            {"problem": {"name": "l1_system", "params": {"d": 5, "m": 8}, "seed": 1},
             "method": "polyak_subgrad", "iterations": 120},
            {"problem": {"name": "quad_diag", "params": {"lambdas": [2, 1]}, "seed": 4},
             "noise": {"kind": "additive_stoch_grad", "sigma": 1.0},
             "method": {"name": "sgd", "params": {"step_rule": "decay", "gamma0": 0.5,
                                                  "averaging": "uniform"}},
             "iterations": 2000},
            {"problem": {"name": "quad_diag", "params": {"lambdas": [1, 1]}, "seed": 2},
             "noise": {"kind": "zo_stoch", "delta_tilde": 0.01},
             "method": {"name": "zo_sgd", "params": {"gamma": 0.005, "tau": 0.001,
                                                     "beta": 2}},
             "iterations": 500},
        ]
        for i, doc in enumerate(configs):
            for fmt in ("csv", "json"):
                p1 = str(tmp_path / f"run{i}_a.{fmt}")
                p2 = str(tmp_path / f"run{i}_b.{fmt}")
                spec = parse_config(json.dumps(doc))
                run_experiment(spec, trace_path=p1)
                run_experiment(spec, trace_path=p2)
                with open(p1, "rb") as f1, open(p2, "rb") as f2:
                    assert f1.read() == f2.read()
