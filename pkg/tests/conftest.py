from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from regpath.core import FULL

ROOT = Path(__file__).resolve().parent.parent
IRIS_CSV = ROOT / "data" / "iris" / "iris.csv"
MNIST_DIR = ROOT / "data" / "mnist"
CONFIG_DIR = ROOT / "configs"


def mnist_available() -> bool:
    return all(
        any((MNIST_DIR / f"{stem}{suffix}").exists() for suffix in ("", ".gz"))
        for stem in ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                     "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")
    )


needs_mnist = pytest.mark.skipif(not mnist_available(), reason="MNIST IDX files not found in data/mnist")
needs_iris = pytest.mark.skipif(not IRIS_CSV.exists(), reason="data/iris/iris.csv not found")


class ToyProblem:
    """1-D problem f1 = 0.5 (theta - 1)^2, g2 = |theta|; its Pareto set is [0, 1]."""

    n = 1
    l1_weight = 1.0

    def eval_f1(self, theta, batch=FULL):
        return 0.5 * float((theta[0] - 1.0) ** 2)

    def grad_f1(self, theta, batch=FULL):
        return np.array([theta[0] - 1.0])

    def value_and_grad_f1(self, theta, batch=FULL):
        return self.eval_f1(theta), self.grad_f1(theta)

    def eval_g2(self, theta):
        return float(np.abs(theta).sum())

    def prox_g2(self, theta, step):
        return np.sign(theta) * np.maximum(np.abs(theta) - step, 0.0)

    def batch_size(self, batch=FULL):
        return 1


@pytest.fixture
def toy():
    return ToyProblem()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
