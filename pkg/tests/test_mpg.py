import warnings

import numpy as np
import pytest
from scipy.optimize import minimize

from regpath.baselines import ista_oracle
from regpath.core import FULL, DivergenceError, NonFiniteError, Trace
from regpath.data import Dataset, minibatches
from regpath.mpg import SolverConfig, criticality_residual, direction_subproblem, mpg_solve
from regpath.problems import LassoProblem, make_lasso_instance


def model(d, grad1, theta, problem, h):
    """psi(d) + ||d||^2 / 2h evaluated row-wise on a batch of directions."""
    d = np.atleast_2d(d)
    a = d @ grad1
    b = problem.l1_weight * (np.abs(theta + d).sum(axis=1) - np.abs(theta).sum())
    return np.maximum(a, b) + (d**2).sum(axis=1) / (2 * h)


def qp_direction(grad1, theta, w, h):
    """Epigraph form of the subproblem solved as a smooth QP (independent of the dual search).

    Variables z = (d, u, t): minimize t + ||d||^2 / 2h subject to grad1 @ d <= t,
    w * (sum(u) - ||theta||_1) <= t and -u <= theta + d <= u.
    """
    n = theta.size
    l1 = np.abs(theta).sum()
    cons = [
        {"type": "ineq", "fun": lambda z: z[-1] - grad1 @ z[:n], "jac": lambda z: np.r_[-grad1, np.zeros(n), 1.0]},
        {"type": "ineq", "fun": lambda z: z[-1] - w * (z[n:2 * n].sum() - l1),
         "jac": lambda z: np.r_[np.zeros(n), -w * np.ones(n), 1.0]},
        {"type": "ineq", "fun": lambda z: z[n:2 * n] - (theta + z[:n]),
         "jac": lambda z: np.c_[-np.eye(n), np.eye(n), np.zeros(n)]},
        {"type": "ineq", "fun": lambda z: z[n:2 * n] + (theta + z[:n]),
         "jac": lambda z: np.c_[np.eye(n), np.eye(n), np.zeros(n)]},
    ]
    z0 = np.r_[np.zeros(n), np.abs(theta), 0.0]
    res = minimize(
        lambda z: z[-1] + z[:n] @ z[:n] / (2 * h), z0,
        jac=lambda z: np.r_[z[:n] / h, np.zeros(n), 1.0],
        constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 1000},
    )
    assert res.success, res.message
    return res.x[:n]


def test_toy_descent_direction(toy):
    # oracle: primal grid d in [-2, 2] step 1e-4; dual grid for lam step 1e-4
    theta, h = np.array([1.5]), 1.0
    grad = toy.grad_f1(theta)
    d_grid = np.arange(-2.0, 2.0 + 5e-5, 1e-4)[:, None]
    d_star = d_grid[np.argmin(model(d_grid, grad, theta, toy, h))][0]
    lam_grid = np.arange(0.0, 1.0 + 5e-5, 1e-4)
    d_lam = np.sign(theta - h * lam_grid * grad) * np.maximum(np.abs(theta - h * lam_grid * grad) - h * (1 - lam_grid), 0) - theta
    dual = lam_grid * grad[0] * d_lam + (1 - lam_grid) * (np.abs(theta + d_lam) - np.abs(theta)) + d_lam**2 / (2 * h)
    lam_oracle = lam_grid[np.argmax(dual)]
    assert abs(d_star - -0.5) < 1e-4 and lam_oracle == 1.0

    res = direction_subproblem(grad, theta, toy, SolverConfig(step_h=h))
    assert res.d[0] == pytest.approx(-0.5, abs=1e-6)
    assert res.lambda_star == pytest.approx(1.0, abs=1e-6)
    assert res.psi == pytest.approx(-0.25, abs=1e-6)
    assert res.model_decrease == pytest.approx(-0.125, abs=1e-6)


def test_toy_critical_point_gives_zero(toy):
    theta = np.array([0.5])
    # lam = 2/3 certifies: lam * (-0.5) + (1 - lam) * 1 = 0
    assert criticality_residual(toy, theta) <= 1e-9
    res = direction_subproblem(toy.grad_f1(theta), theta, toy, SolverConfig(step_h=1.0))
    assert abs(res.d[0]) <= 1e-6


def test_origin_with_zero_gradient(toy):
    res = direction_subproblem(np.zeros(1), np.zeros(1), toy, SolverConfig(step_h=1.0))
    assert res.d[0] == 0.0 and res.psi == 0.0


def test_matches_qp_oracle(rng):
    for k in range(30):
        n = int(rng.integers(1, 4))
        theta = rng.normal(size=n) * rng.choice([0.0, 0.2, 1.0], size=n)
        grad = rng.normal(size=n)
        problem = LassoProblem(np.eye(n), np.zeros(n), l1_weight=rng.uniform(0.2, 1.5))
        h = rng.uniform(0.2, 1.0)
        res = direction_subproblem(grad, theta, problem, SolverConfig(step_h=h))
        oracle = qp_direction(grad, theta, problem.l1_weight, h)
        np.testing.assert_allclose(res.d, oracle, atol=1e-6)
        assert model(res.d, grad, theta, problem, h)[0] <= model(oracle, grad, theta, problem, h)[0] + 1e-9


def test_zero_is_always_feasible(rng):
    for _ in range(300):
        n = int(rng.integers(1, 6))
        theta = rng.normal(size=n) * rng.integers(0, 2, size=n)
        grad = rng.normal(size=n) * rng.choice([1e-3, 1.0, 10.0])
        problem = LassoProblem(np.eye(n), np.zeros(n), l1_weight=rng.uniform(0.01, 2))
        h = rng.uniform(0.01, 3)
        res = direction_subproblem(grad, theta, problem, SolverConfig(step_h=h))
        assert 0.0 <= res.lambda_star <= 1.0
        assert res.model_decrease <= 1e-15
        assert res.psi <= -float(res.d @ res.d) / (2 * h) + 1e-15


def test_non_finite_gradient_rejected(toy):
    with pytest.raises(NonFiniteError):
        direction_subproblem(np.array([np.nan]), np.array([1.0]), toy, SolverConfig(step_h=1.0))


def test_dual_search_iteration_cap(toy):
    theta = np.array([1.5])
    with pytest.raises(RuntimeError, match="dual search"):
        # a tolerance below float spacing can never be met
        direction_subproblem(np.array([-2.0]), theta, toy, SolverConfig(step_h=1.0, dual_tol=1e-300))


def test_solver_config_validation():
    for bad in ({"step_h": 0.0}, {"step_h": 1.0, "max_iter": 0}, {"step_h": 1.0, "direction_tol": 0.0},
                {"step_h": 1.0, "dual_tol": -1.0}):
        with pytest.raises(ValueError):
            SolverConfig(**bad)
    assert SolverConfig(step_h=1.0).tolerance(100) == pytest.approx(1e-5)


def test_solve_stops_at_critical_start(toy):
    theta, iters, trace = mpg_solve(toy, np.array([0.5]), SolverConfig(step_h=1.0))
    assert iters == 1 and theta[0] == 0.5
    assert len(trace.rows) == 1


def test_solve_toy_from_two(toy):
    theta, iters, _ = mpg_solve(toy, np.array([2.0]), SolverConfig(step_h=1.0, direction_tol=1e-10))
    assert 0.0 <= theta[0] <= 1.0
    assert criticality_residual(toy, theta) <= 1e-6


def test_lasso_from_zero_is_already_critical():
    p = make_lasso_instance(seed=0)
    theta, iters, trace = mpg_solve(p, np.zeros(p.n), SolverConfig(step_h=1 / p.lipschitz))
    assert np.all(np.diff(trace.f1) <= 0) and np.all(np.diff(trace.f2) <= 0)
    assert criticality_residual(p, theta) <= 1e-8


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lasso_monotone_and_critical(seed):
    p = make_lasso_instance(seed=seed, l1_weight=1.0)
    start = p.least_squares() + np.random.default_rng(seed).normal(size=p.n)
    cfg = SolverConfig(step_h=1 / p.lipschitz, max_iter=50000, direction_tol=1e-10, lipschitz_hint=p.lipschitz)
    theta, _, trace = mpg_solve(p, start, cfg)
    f1, f2 = trace.f1, trace.f2
    assert np.all(np.diff(f1) <= 1e-12 * np.abs(f1[:-1]))
    assert np.all(np.diff(f2) <= 1e-12 * np.abs(f2[:-1]))
    assert criticality_residual(p, theta) <= 1e-6


def test_small_direction_iff_critical():
    p = make_lasso_instance(seed=4, l1_weight=1.0)
    h = 1 / p.lipschitz
    cfg = SolverConfig(step_h=h, max_iter=100000, direction_tol=1e-8)
    # converged MPG points: tiny d implies tiny residual
    for scale in (0.2, 0.7, 1.3):
        theta, _, _ = mpg_solve(p, scale * p.least_squares(), cfg)
        d = direction_subproblem(p.grad_f1(theta), theta, p, cfg).d
        if np.linalg.norm(d) <= 1e-8:
            assert criticality_residual(p, theta) <= 1e-6
    # exact LASSO solutions are Pareto critical: tiny residual implies tiny d
    for mu in (0.05, 0.5, 2.0):
        theta = ista_oracle(p.A, p.b, mu)
        assert criticality_residual(p, theta) <= 1e-9
        d = direction_subproblem(p.grad_f1(theta), theta, p, cfg).d
        assert np.linalg.norm(d) <= 1e-8


class WrongGradient:
    """f1 = exp(-20 theta) but the reported gradient is +1, so MPG walks toward 0 and f1 explodes."""

    n = 1
    l1_weight = 1.0

    def eval_f1(self, theta, batch=FULL):
        return float(np.exp(-20 * theta[0]))

    def value_and_grad_f1(self, theta, batch=FULL):
        return self.eval_f1(theta), np.array([1.0])

    def eval_g2(self, theta):
        return float(np.abs(theta).sum())

    def prox_g2(self, theta, step):
        return np.sign(theta) * np.maximum(np.abs(theta) - step, 0.0)

    def batch_size(self, batch=FULL):
        return 1


def test_divergence_guard():
    with pytest.raises(DivergenceError, match="reduce step_h"):
        mpg_solve(WrongGradient(), np.array([1.0]), SolverConfig(step_h=0.05, max_iter=1000))


def test_step_size_does_not_break_convex_lasso():
    # on a convex problem the max-type model keeps even very large steps from blowing up
    p = make_lasso_instance(seed=0)
    _, _, trace = mpg_solve(p, p.least_squares() + 1.0, SolverConfig(step_h=500 / p.lipschitz, max_iter=2000))
    assert trace.f1.max() == trace.f1[0]


def test_large_step_warns():
    p = make_lasso_instance(seed=0)
    with pytest.warns(UserWarning, match="2/L"):
        mpg_solve(p, np.zeros(p.n), SolverConfig(step_h=3 / p.lipschitz, max_iter=2, lipschitz_hint=p.lipschitz))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        mpg_solve(p, np.zeros(p.n), SolverConfig(step_h=1 / p.lipschitz, max_iter=2, lipschitz_hint=p.lipschitz))


def test_stochastic_mode_runs_fixed_iterations():
    from regpath.nn import MlpArchitecture, mlp_init
    from regpath.problems import MlpProblem

    rng = np.random.default_rng(0)
    ds = Dataset(rng.normal(size=(40, 3)), rng.integers(0, 2, size=40), name="blobs", n_classes=2)
    arch = MlpArchitecture((3, 4, 2))
    p = MlpProblem(arch, ds)
    trace = Trace()
    _, iters, _ = mpg_solve(p, np.zeros(p.n), SolverConfig(step_h=0.1, max_iter=13), minibatches(ds, 8, 0), trace)
    assert iters == 13 and trace.gradient_evals == 13 and trace.samples_touched == 13 * 8


def test_unknown_batch_mode(toy):
    with pytest.raises(ValueError):
        mpg_solve(toy, np.ones(1), SolverConfig(step_h=1.0), batch_mode="half")


def test_residual_examples(toy):
    p = make_lasso_instance(seed=1)
    assert criticality_residual(p, np.zeros(p.n)) == 0.0
    assert criticality_residual(p, p.least_squares()) <= 1e-9
    # 1-D scan: min over lam of |0.5 lam + (1 - lam)| is 0.5 at lam = 1
    lam = np.linspace(0, 1, 100001)
    assert np.min(np.abs(0.5 * lam + (1 - lam))) == pytest.approx(0.5)
    assert criticality_residual(toy, np.array([1.5])) == pytest.approx(0.5, abs=1e-9)
