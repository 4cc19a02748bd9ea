"""Concrete bi-objective problems: LASSO and MLP training vs. scaled l1 norm."""
from __future__ import annotations

import numpy as np

from . import nn
from .core import FULL
from .data import Dataset
from .prox import soft_threshold


class _ScaledL1:
    """g2(theta) = l1_weight * ||theta||_1, defaulting to 1/n."""

    n: int
    l1_weight: float

    def eval_g2(self, theta: np.ndarray) -> float:
        return float(self.l1_weight * np.abs(theta).sum())

    def prox_g2(self, theta: np.ndarray, step: float) -> np.ndarray:
        return soft_threshold(theta, self.l1_weight * step)

    def grad_f1(self, theta: np.ndarray, batch=FULL) -> np.ndarray:
        return self.value_and_grad_f1(theta, batch)[1]


class LassoProblem(_ScaledL1):
    """f1 = 0.5 * ||A theta - b||^2 (full batch only)."""

    def __init__(self, A, b, l1_weight: float | None = None):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.asarray(b, dtype=np.float64).reshape(-1)
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError(f"A has {self.A.shape[0]} rows but b has {self.b.shape[0]} entries")
        self.n = self.A.shape[1]
        self.l1_weight = 1.0 / self.n if l1_weight is None else float(l1_weight)
        self._lipschitz = None

    def _check_batch(self, batch):
        if not (isinstance(batch, str) and batch == FULL):
            raise ValueError("LassoProblem only supports full-batch evaluation")

    def eval_f1(self, theta: np.ndarray, batch=FULL) -> float:
        self._check_batch(batch)
        r = self.A @ theta - self.b
        return float(0.5 * r @ r)

    def value_and_grad_f1(self, theta: np.ndarray, batch=FULL) -> tuple[float, np.ndarray]:
        self._check_batch(batch)
        r = self.A @ theta - self.b
        return float(0.5 * r @ r), self.A.T @ r

    def batch_size(self, batch=FULL) -> int:
        return self.A.shape[0]

    @property
    def lipschitz(self) -> float:
        """Largest eigenvalue of A^T A."""
        if self._lipschitz is None:
            self._lipschitz = float(np.linalg.eigvalsh(self.A.T @ self.A)[-1])
        return self._lipschitz

    def least_squares(self) -> np.ndarray:
        return np.linalg.lstsq(self.A, self.b, rcond=None)[0]


def make_lasso_instance(rows: int = 20, cols: int = 10, seed: int = 0, noise: float = 0.01,
                        nonzeros: int | None = None, l1_weight: float | None = None) -> LassoProblem:
    """Random instance: A ~ N(0, 1), b = A @ theta_sparse + noise * N(0, 1)."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, cols))
    k = max(1, cols // 3) if nonzeros is None else nonzeros
    theta_sparse = np.zeros(cols)
    support = rng.choice(cols, size=k, replace=False)
    theta_sparse[support] = rng.standard_normal(k)
    b = A @ theta_sparse + noise * rng.standard_normal(rows)
    return LassoProblem(A, b, l1_weight)


class MlpProblem(_ScaledL1):
    """f1 = mean cross-entropy of an MLP on ``dataset``; minibatches are :class:`nn.Batch`."""

    def __init__(self, arch: nn.MlpArchitecture, dataset: Dataset, l1_weight: float | None = None):
        if dataset.features.shape[1] != arch.input_dim:
            raise ValueError(
                f"dataset has {dataset.features.shape[1]} features, architecture expects {arch.input_dim}"
            )
        self.arch = arch
        self.dataset = dataset
        self._full = dataset.as_batch()
        self.n = nn.mlp_param_count(arch)
        self.l1_weight = 1.0 / self.n if l1_weight is None else float(l1_weight)

    def _resolve(self, batch) -> nn.Batch:
        if isinstance(batch, str):
            if batch != FULL:
                raise ValueError(f"unknown batch spec {batch!r}")
            return self._full
        return batch

    def eval_f1(self, theta: np.ndarray, batch=FULL) -> float:
        return nn.loss(self.arch, theta, self._resolve(batch))

    def value_and_grad_f1(self, theta: np.ndarray, batch=FULL) -> tuple[float, np.ndarray]:
        return nn.loss_and_grad(self.arch, theta, self._resolve(batch))

    def batch_size(self, batch=FULL) -> int:
        return len(self._resolve(batch))

    def accuracy(self, theta: np.ndarray) -> float:
        return nn.accuracy(self.arch, theta, self._full)
