"""Multiobjective proximal gradient (MPG) corrector for f1 (smooth) vs. g2 (weighted l1).

The descent direction at ``theta`` minimizes

    psi(d) + ||d||^2 / (2h),   psi(d) = max(grad1 @ d, g2(theta + d) - g2(theta)).

With one smooth and one prox-friendly objective this min-max has a concave
one-dimensional dual in the weight ``lam`` of the smooth objective:

    d(lam) = prox_{h (1 - lam) g2}(theta - h lam grad1) - theta,

and the dual derivative is ``a(d(lam)) - b(d(lam))`` with ``a(d) = grad1 @ d``
and ``b(d) = g2(theta + d) - g2(theta)``. It is non-increasing in ``lam``, so
the optimal weight is found by bisection and the direction recovered as
``d(lam*)``.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.optimize import minimize_scalar

from .core import FULL, BiObjectiveProblem, DivergenceError, NonFiniteError, Trace, as_param_vector

log = logging.getLogger(__name__)

MAX_DUAL_ITERATIONS = 200
MAX_POLISH_ITERATIONS = 40
DIVERGENCE_FACTOR = 1e6


@dataclass(frozen=True)
class SolverConfig:
    step_h: float
    max_iter: int = 1000
    direction_tol: float | None = None  # None: 1e-6 * sqrt(n)
    dual_tol: float = 1e-3
    lipschitz_hint: float | None = None

    def __post_init__(self):
        if not self.step_h > 0:
            raise ValueError(f"step_h must be > 0, got {self.step_h}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.direction_tol is not None and not self.direction_tol > 0:
            raise ValueError(f"direction_tol must be > 0, got {self.direction_tol}")
        if not self.dual_tol > 0:
            raise ValueError(f"dual_tol must be > 0, got {self.dual_tol}")

    def tolerance(self, n: int) -> float:
        return 1e-6 * math.sqrt(n) if self.direction_tol is None else self.direction_tol


@dataclass(frozen=True)
class DirectionResult:
    d: np.ndarray
    lambda_star: float
    psi: float
    model_decrease: float


def direction_subproblem(grad1: np.ndarray, theta: np.ndarray, problem: BiObjectiveProblem,
                         cfg: SolverConfig, trace: Trace | None = None) -> DirectionResult:
    """Solve the MPG direction subproblem at ``theta`` given the smooth gradient ``grad1``."""
    if not np.all(np.isfinite(grad1)):
        raise NonFiniteError("gradient of f1 is not finite")
    h = cfg.step_h
    g2_theta = problem.eval_g2(theta)
    n_prox = 0
    best = None  # (model value, lam, d, a, b) of the best direction seen

    def slope(lam: float) -> float:
        """Dual derivative at ``lam``; also keeps the best primal candidate."""
        nonlocal n_prox, best
        n_prox += 1
        d = problem.prox_g2(theta - (h * lam) * grad1, h * (1.0 - lam)) - theta
        a = float(grad1 @ d)
        b = problem.eval_g2(theta + d) - g2_theta
        value = max(a, b) + float(d @ d) / (2 * h)
        if best is None or value < best[0]:
            best = (value, lam, d, a, b)
        return a - b

    s_lo = slope(0.0)
    if s_lo > 0:
        s_hi = slope(1.0)
        if s_hi < 0:
            lo, hi = 0.0, 1.0
            steps = 0
            while hi - lo > cfg.dual_tol:
                steps += 1
                if steps > MAX_DUAL_ITERATIONS:
                    raise RuntimeError("dual search did not converge; is prox_g2 broken?")
                mid = 0.5 * (lo + hi)
                s = slope(mid)
                if s > 0:
                    lo, s_lo = mid, s
                else:
                    hi, s_hi = mid, s
            # the dual derivative is piecewise affine in lam: Illinois-type
            # regula falsi inside the bracket hits the root in a few steps
            side, previous = 0, None
            for _ in range(MAX_POLISH_ITERATIONS):
                lam = lo + s_lo * (hi - lo) / (s_lo - s_hi)
                if not lo < lam < hi or (previous is not None and abs(lam - previous) <= 1e-14):
                    break
                previous = lam
                s = slope(lam)
                if s == 0:
                    break
                if s > 0:
                    lo, s_lo = lam, s
                    if side == 1:
                        s_hi *= 0.5
                    side = 1
                else:
                    hi, s_hi = lam, s
                    if side == -1:
                        s_lo *= 0.5
                    side = -1
    value, lam, d, a, b = best
    # never return anything worse than the always-feasible d = 0
    if value > 0:
        d = np.zeros_like(theta)
        a = b = 0.0
    if trace is not None:
        trace.prox_evals += n_prox
    psi = max(a, b)
    return DirectionResult(d=d, lambda_star=lam, psi=psi, model_decrease=psi + float(d @ d) / (2 * h))


def mpg_solve(problem: BiObjectiveProblem, theta0, cfg: SolverConfig,
              batch_mode: str | Iterator = FULL, trace: Trace | None = None):
    """Iterate ``theta <- theta + d`` until ``||d|| <= tol`` or ``max_iter`` iterations.

    ``batch_mode`` is :data:`FULL` or an iterator of minibatches; with
    minibatches a fresh batch is drawn every iteration and the tolerance stop
    is disabled. Returns ``(theta, iterations, trace)``.
    """
    theta = as_param_vector(theta0, problem.n)
    trace = Trace() if trace is None else trace
    deterministic = isinstance(batch_mode, str)
    if deterministic and batch_mode != FULL:
        raise ValueError(f"unknown batch mode {batch_mode!r}")
    if cfg.lipschitz_hint and cfg.step_h > 2.0 / cfg.lipschitz_hint:
        warnings.warn(
            f"step_h={cfg.step_h} exceeds 2/L={2.0 / cfg.lipschitz_hint:.3g}; convergence is not guaranteed",
            stacklevel=2,
        )
    tol = cfg.tolerance(problem.n)
    f1_start = None
    iterations = 0
    for k in range(cfg.max_iter):
        batch = FULL if deterministic else next(batch_mode)
        f1, grad = problem.value_and_grad_f1(theta, batch)
        trace.count_gradient(problem.batch_size(batch))
        if not np.isfinite(f1):
            raise NonFiniteError(f"f1 became non-finite at iteration {k}")
        if f1_start is None:
            f1_start = max(abs(f1), 1e-12)
        elif f1 > DIVERGENCE_FACTOR * f1_start:
            raise DivergenceError(
                f"f1 grew from {f1_start:.4g} to {f1:.4g} at iteration {k}; reduce step_h"
            )
        res = direction_subproblem(grad, theta, problem, cfg, trace)
        norm_d = float(np.linalg.norm(res.d))
        trace.record(f1, problem.eval_g2(theta), norm_d, res.lambda_star)
        iterations = k + 1
        if deterministic and norm_d <= tol:
            break
        theta = theta + res.d
    return theta, iterations, trace


def _subdifferential_distance(lams: np.ndarray, grad: np.ndarray, theta: np.ndarray, w: float) -> np.ndarray:
    lams = np.atleast_1d(lams)[:, None]
    nz = theta != 0
    on = lams * grad[nz] + (1 - lams) * w * np.sign(theta[nz])
    off = np.maximum(0.0, lams * np.abs(grad[~nz]) - (1 - lams) * w)
    return np.sqrt((on**2).sum(axis=1) + (off**2).sum(axis=1))


def criticality_residual(problem: BiObjectiveProblem, theta, grad: np.ndarray | None = None) -> float:
    """Distance from 0 to ``lam * grad f1 + (1 - lam) * subdiff g2`` minimized over ``lam``.

    Zero exactly at Pareto critical points. ``lam`` is scanned on a grid of
    1001 values, then refined by a bounded scalar search around the best one.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if grad is None:
        grad = problem.grad_f1(theta, FULL)
    w = problem.l1_weight
    grid = np.linspace(0.0, 1.0, 1001)
    dist = _subdifferential_distance(grid, grad, theta, w)
    k = int(np.argmin(dist))
    best = float(dist[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, 1000)]
    if hi > lo:
        # the squared distance is piecewise quadratic, which the bounded search handles well
        res = minimize_scalar(
            lambda lam: float(_subdifferential_distance(np.array([lam]), grad, theta, w)[0] ** 2),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        best = min(best, math.sqrt(max(float(res.fun), 0.0)))
    return best
