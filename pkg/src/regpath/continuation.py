"""Predictor-corrector continuation along the loss / l1 front.

Starting from one front point (found with the MPG solver), each leg repeats

* a predictor: a few Adam (or plain gradient) steps on the loss to move toward
  lower loss, or a few soft-thresholding steps to move toward sparsity;
* a corrector: a short MPG run that pulls the predicted point back onto the
  front.

Every corrected point is evaluated and appended to a :class:`FrontArchive`.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Literal

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
from .mpg import SolverConfig, mpg_solve
from .optim import Adam, AdamConfig
from .prox import soft_threshold

log = logging.getLogger(__name__)

Direction = Literal["toward_loss", "toward_sparsity", "both"]

LEG_LABELS = {"toward_loss": "loss-direction", "toward_sparsity": "sparsity-direction"}


@dataclass(frozen=True)
class ContinuationConfig:
    """Continuation schedule.

    ``eta`` is the MPG step for the initial solve and the correctors (unless
    ``corrector_step`` overrides it), the shrinkage step of the sparsity
    predictor, and the learning rate of the plain-gradient predictor.
    ``shrink_weight`` defaults to the problem's l1 weight.
    """

    n_cont: int = 44
    predictor_iters: int = 7
    corrector_iters: int = 20
    init_iters: int = 500
    eta: float = 1e-2
    direction: Direction = "both"
    adam: AdamConfig = field(default_factory=AdamConfig)
    slope_stop: float | None = None
    seed: int = 0
    predictor: Literal["adam", "gd"] = "adam"
    shrink_iters: int | None = None
    shrink_weight: float | None = None
    corrector_step: float | None = None
    direction_tol: float | None = None
    dual_tol: float = 1e-3
    sparsity_points: int | None = None  # for direction="both"; default half of n_cont - 1

    def __post_init__(self):
        for name in ("n_cont", "predictor_iters", "corrector_iters", "init_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.eta > 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if self.direction not in ("toward_loss", "toward_sparsity", "both"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.slope_stop is not None and not self.slope_stop > 0:
            raise ValueError("slope_stop must be > 0")
        if self.predictor not in ("adam", "gd"):
            raise ValueError(f"unknown predictor {self.predictor!r}")

    def solver(self, max_iter: int) -> SolverConfig:
        return SolverConfig(
            step_h=self.corrector_step or self.eta,
            max_iter=max_iter,
            direction_tol=self.direction_tol,
            dual_tol=self.dual_tol,
        )

    def legs(self) -> list[tuple[str, int]]:
        rest = self.n_cont - 1
        if self.direction != "both":
            return [(self.direction, rest)]
        n_sparse = rest // 2 if self.sparsity_points is None else min(self.sparsity_points, rest)
        return [("toward_sparsity", n_sparse), ("toward_loss", rest - n_sparse)]


def predictor_gradient(theta, problem: BiObjectiveProblem, iters: int, adam: AdamConfig,
                       batch_mode: str | Iterator = FULL, trace: Trace | None = None,
                       optimizer: Adam | None = None, gd_step: float | None = None) -> np.ndarray:
    """Take ``iters`` loss-only steps (Adam, or plain gradient descent when ``gd_step`` is set).

    Pass ``optimizer`` to carry Adam moments over between calls.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    theta = as_param_vector(theta, problem.n)
    if optimizer is None and gd_step is None:
        optimizer = Adam(adam, problem.n)
    for _ in range(iters):
        batch = batch_mode if isinstance(batch_mode, str) else next(batch_mode)
        _, grad = problem.value_and_grad_f1(theta, batch)
        if trace is not None:
            trace.count_gradient(problem.batch_size(batch))
        theta = theta - gd_step * grad if gd_step is not None else optimizer.step(theta, grad)
        if not np.all(np.isfinite(theta)):
            raise NonFiniteError("predictor update produced non-finite parameters")
    return theta


def predictor_shrink(theta, eta: float, iters: int, weight: float, trace: Trace | None = None) -> np.ndarray:
    """Apply the prox of ``eta * weight * ||.||_1`` ``iters`` times."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    theta = np.asarray(theta, dtype=np.float64)
    for _ in range(iters):
        theta = soft_threshold(theta, eta * weight)
    if trace is not None:
        trace.prox_evals += iters
    return theta


def front_slope(archive: FrontArchive) -> list[float]:
    """dF1/dF2 between consecutive points of an archive sorted by g2.

    Vertical segments (equal g2) give ``math.inf``.
    """
    if len(archive) < 2:
        raise ValueError("front_slope needs at least 2 points")
    g2 = [p.g2 for p in archive]
    if any(b < a for a, b in zip(g2, g2[1:])):
        raise ValueError("archive must be sorted by g2")
    out = []
    for p, q in zip(archive.points, archive.points[1:]):
        dg = q.g2 - p.g2
        out.append(math.inf if dg == 0 else (q.f1_train - p.f1_train) / dg)
    return out


def front_filter_nondominated(archive: FrontArchive) -> FrontArchive:
    """Mutually non-dominated subset in original order (exact duplicates are all kept)."""
    obj = archive.objectives()
    keep = np.zeros(len(archive), dtype=bool)
    order = np.lexsort((obj[:, 1], obj[:, 0]))
    best_g2 = math.inf
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and obj[order[j], 0] == obj[order[i], 0]:
            j += 1
        group = order[i:j]
        group_min = obj[group, 1].min()
        if group_min < best_g2:
            keep[group[obj[group, 1] == group_min]] = True
            best_g2 = group_min
        i = j
    out = FrontArchive()
    for k in np.flatnonzero(keep):
        out.append(archive.points[k], archive.direction_labels[k])
    return out


def _steep(prev, point, threshold: float) -> bool:
    pair = FrontArchive()
    for p in sorted((prev, point), key=lambda p: p.g2):
        pair.append(p, "initial")
    return abs(front_slope(pair)[0]) > threshold


def continuation_run(problem: BiObjectiveProblem, theta_init, cfg: ContinuationConfig,
                     test_problem: BiObjectiveProblem | None = None,
                     batches: Iterator | None = None, trace: Trace | None = None,
                     archive: FrontArchive | None = None) -> FrontArchive:
    """Trace the front from ``theta_init`` following ``cfg``.

    ``batches`` switches every gradient evaluation to minibatches drawn from
    that iterator (one per step); ``None`` means full-batch. The archive's
    ``trace`` holds the concatenated solver log and the budget counters.
    Pass an empty ``archive`` to keep the points found so far if the run raises.
    """
    trace = Trace() if trace is None else trace
    batch_mode = FULL if batches is None else batches
    archive = FrontArchive() if archive is None else archive
    archive.trace = trace
    shrink_weight = problem.l1_weight if cfg.shrink_weight is None else cfg.shrink_weight
    shrink_iters = cfg.predictor_iters if cfg.shrink_iters is None else cfg.shrink_iters

    theta0, _, _ = mpg_solve(problem, theta_init, cfg.solver(cfg.init_iters), batch_mode, trace)
    start = evaluate(problem, theta0, test_problem, index=0, grad_evals_cum=trace.gradient_evals)
    archive.append(start, "initial")

    corrector = cfg.solver(cfg.corrector_iters)
    for direction, count in cfg.legs():
        label = LEG_LABELS[direction]
        theta, prev = theta0, start
        optimizer = Adam(cfg.adam, problem.n) if cfg.predictor == "adam" else None
        for j in range(1, count + 1):
            if direction == "toward_sparsity":
                if not np.any(theta):
                    log.info("sparsity leg reached theta = 0 after %d points", j - 1)
                    break
                predicted = predictor_shrink(theta, cfg.eta, shrink_iters, shrink_weight, trace)
            else:
                predicted = predictor_gradient(
                    theta, problem, cfg.predictor_iters, cfg.adam, batch_mode, trace,
                    optimizer=optimizer, gd_step=cfg.eta if cfg.predictor == "gd" else None,
                )
            try:
                theta, _, _ = mpg_solve(problem, predicted, corrector, batch_mode, trace)
            except (DivergenceError, NonFiniteError) as exc:
                log.warning("%s leg aborted at point %d: %s", direction, j, exc)
                break
            point = evaluate(problem, theta, test_problem, index=j, grad_evals_cum=trace.gradient_evals)
            archive.append(point, label)
            if cfg.slope_stop is not None and _steep(prev, point, cfg.slope_stop):
                log.info("%s leg stopped early: front slope exceeds %g", direction, cfg.slope_stop)
                break
            prev = point
    return archive
