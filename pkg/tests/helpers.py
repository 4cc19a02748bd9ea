"""Oracles and fixed settings shared by the unit and acceptance tests."""
from __future__ import annotations

import numpy as np

from regpath import nn
from regpath.continuation import ContinuationConfig
from regpath.optim import AdamConfig


def kink_free(arch, theta, batch, margin=1e-4) -> bool:
    """True if every hidden pre-activation is at least ``margin`` away from the ReLU kink."""
    _, pre, _ = nn.forward(arch, theta, batch.inputs)
    return all(np.min(np.abs(z)) >= margin for z in pre)


def fd_gradient_check(arch, theta, batch, coords, eps=1e-6, margin=1e-4):
    """Central differences on ``coords``; returns (analytic, numeric) arrays of the probed entries.

    A probe is only valid if neither perturbed point crosses a ReLU kink, which
    is guaranteed when all pre-activations of the base point exceed ``margin``
    and the perturbation moves them by less than that.
    """
    if not kink_free(arch, theta, batch, margin):
        raise ValueError("base point is too close to a ReLU kink")
    _, grad = nn.loss_and_grad(arch, theta, batch)
    numeric = []
    for j in coords:
        e = np.zeros_like(theta)
        e[j] = eps
        numeric.append((nn.loss(arch, theta + e, batch) - nn.loss(arch, theta - e, batch)) / (2 * eps))
    return grad[list(coords)], np.array(numeric)


def kink_free_point(arch, batch, seed, scale=0.5, tries=200):
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        theta = rng.uniform(-scale, scale, nn.mlp_param_count(arch))
        if kink_free(arch, theta, batch):
            return theta
    raise RuntimeError("no kink-free parameter vector found")


def relative_error(a, b) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-300))


def lasso_schedule(problem, n_cont=40, sparsity_points=19, predictor_iters=5, start_fraction=0.5):
    """Continuation settings used for the convex LASSO checks, scaled to the instance.

    The start is ``start_fraction`` times the least-squares solution. The Adam
    learning rate is sized so the loss leg can cover the distance to the
    least-squares point, and the shrink weight so the sparsity leg can reach
    zero, each with some slack.
    """
    ls = problem.least_squares()
    theta0 = start_fraction * ls
    h = 1.0 / problem.lipschitz
    loss_points = n_cont - 1 - sparsity_points
    lr = 3.0 * np.mean(np.abs(ls - theta0)) / (loss_points * predictor_iters)
    shrink = 1.4 * np.max(np.abs(theta0)) / (sparsity_points * predictor_iters * h)
    cfg = ContinuationConfig(
        n_cont=n_cont,
        sparsity_points=sparsity_points,
        predictor_iters=predictor_iters,
        corrector_iters=20000,
        init_iters=20000,
        eta=h,
        corrector_step=1.9 * h,
        direction_tol=1e-10,
        adam=AdamConfig(lr=lr),
        shrink_weight=shrink,
    )
    return theta0, cfg
