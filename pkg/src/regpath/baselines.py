"""Weighted-sum baseline and the ISTA ground truth for LASSO fronts."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .core import (
    FULL,
    BiObjectiveProblem,
    DivergenceError,
    FrontArchive,
    NonFiniteError,
    Trace,
    as_param_vector,
    evaluate,
)
from .mpg import DIVERGENCE_FACTOR
from .optim import Adam, AdamConfig
from .prox import soft_threshold

log = logging.getLogger(__name__)

ISTA_MAX_ITER = 10**6


@dataclass(frozen=True)
class WsConfig:
    n_lambda: int = 44
    iters_per_lambda: int = 200
    adam: AdamConfig = field(default_factory=AdamConfig)
    seed: int = 0
    warm_start: bool = False

    def __post_init__(self):
        if self.n_lambda < 1 or self.iters_per_lambda < 1:
            raise ValueError("n_lambda and iters_per_lambda must be >= 1")

    def weights(self) -> np.ndarray:
        """Equidistant loss weights on [0, 1], both endpoints included."""
        return np.linspace(0.0, 1.0, self.n_lambda)


def ws_solve(problem: BiObjectiveProblem, lambda1: float, theta0, iters: int, adam: AdamConfig,
             batch_mode: str | Iterator = FULL, trace: Trace | None = None) -> np.ndarray:
    """Adam on ``lambda1 * f1 + (1 - lambda1) * g2``, with ``w * sign(theta)`` as the l1 subgradient.

    Each iteration is logged to ``trace`` as (f1, g2, step length, lambda1).
    """
    if not 0 <= lambda1 <= 1:
        raise ValueError(f"lambda1 must lie in [0, 1], got {lambda1}")
    theta = as_param_vector(theta0, problem.n)
    opt = Adam(adam, problem.n)
    w = problem.l1_weight
    start = None
    for k in range(iters):
        batch = batch_mode if isinstance(batch_mode, str) else next(batch_mode)
        f1, grad = problem.value_and_grad_f1(theta, batch)
        if trace is not None:
            trace.count_gradient(problem.batch_size(batch))
        value = lambda1 * f1 + (1 - lambda1) * problem.eval_g2(theta)
        if not np.isfinite(value):
            raise NonFiniteError(f"weighted-sum objective became non-finite at iteration {k}")
        if start is None:
            start = max(abs(value), 1e-12)
        elif value > DIVERGENCE_FACTOR * start:
            raise DivergenceError(f"weighted-sum objective grew from {start:.4g} to {value:.4g}")
        new = opt.step(theta, lambda1 * grad + (1 - lambda1) * w * np.sign(theta))
        if trace is not None:
            trace.record(f1, problem.eval_g2(theta), float(np.linalg.norm(new - theta)), lambda1)
        theta = new
    return theta


def ws_sweep(problem: BiObjectiveProblem, cfg: WsConfig, init: np.ndarray | Callable[[int], np.ndarray],
             test_problem: BiObjectiveProblem | None = None, batches: Iterator | None = None,
             trace: Trace | None = None, archive: FrontArchive | None = None) -> FrontArchive:
    """One weighted-sum solve per equidistant weight, labelled ``"ws"``.

    ``init`` is a fixed start vector or a callable mapping a per-weight seed
    (``cfg.seed + k``) to one. Failed weights are logged and skipped.
    """
    trace = Trace() if trace is None else trace
    batch_mode = FULL if batches is None else batches
    archive = FrontArchive() if archive is None else archive
    archive.trace = trace
    previous = None
    for k, lam in enumerate(cfg.weights()):
        if cfg.warm_start and previous is not None:
            theta0 = previous
        else:
            theta0 = init(cfg.seed + k) if callable(init) else init
        try:
            theta = ws_solve(problem, float(lam), theta0, cfg.iters_per_lambda, cfg.adam, batch_mode, trace)
        except (DivergenceError, NonFiniteError) as exc:
            log.warning("weighted sum failed for lambda=%.4f: %s", lam, exc)
            continue
        previous = theta
        archive.append(evaluate(problem, theta, test_problem, index=k, grad_evals_cum=trace.gradient_evals), "ws")
    return archive


def ista_oracle(A, b, lambda1: float, step: float | None = None, tol: float = 1e-13,
                theta0=None) -> np.ndarray:
    """Minimize ``0.5 * ||A theta - b||^2 + lambda1 * ||theta||_1`` by ISTA.

    Iterates until successive iterates differ by at most ``tol`` (max norm).
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = np.asarray(b, dtype=np.float64)
    L = np.linalg.norm(A, 2) ** 2
    if step is None:
        step = 1.0 / L
    elif step > (1.0 + 1e-12) / L:
        raise ValueError(f"ISTA step {step} exceeds 1/||A^T A|| = {1.0 / L}")
    AtA = A.T @ A
    Atb = A.T @ b
    theta = np.zeros(A.shape[1]) if theta0 is None else np.array(theta0, dtype=np.float64)
    for _ in range(ISTA_MAX_ITER):
        new = soft_threshold(theta - step * (AtA @ theta - Atb), step * lambda1)
        if np.max(np.abs(new - theta)) <= tol:
            return new
        theta = new
    raise RuntimeError(f"ISTA did not reach tol={tol} within {ISTA_MAX_ITER} iterations")


def lasso_kkt_residual(A, b, theta, lambda1: float) -> float:
    """Largest violation of the LASSO optimality conditions at ``theta``."""
    g = A.T @ (A @ theta - b)
    on = theta != 0
    viol_on = np.abs(g[on] + lambda1 * np.sign(theta[on]))
    viol_off = np.maximum(np.abs(g[~on]) - lambda1, 0.0)
    return float(max(viol_on.max(initial=0.0), viol_off.max(initial=0.0)))


def lasso_oracle_front(problem, n_weights: int = 50, tol: float = 1e-13) -> FrontArchive:
    """Reference front of a :class:`LassoProblem` from the exact regularization path.

    ISTA is solved for ``n_weights`` penalties spaced evenly on
    ``[0, ||A^T b||_inf]`` (unscaled l1); the largest one gives ``theta = 0``.
    Each solve is warm-started from the previous, larger penalty.
    """
    lam_max = float(np.max(np.abs(problem.A.T @ problem.b)))
    archive = FrontArchive()
    warm = None
    for k, lam in enumerate(np.linspace(lam_max, 0.0, n_weights)):
        theta = ista_oracle(problem.A, problem.b, lam, tol=tol, theta0=warm)
        warm = theta
        archive.append(evaluate(problem, theta, index=k), "ws")
    return archive
