"""Parameter vectors, the bi-objective problem protocol, and front containers.

Parameter vectors are plain 1-D ``float64`` numpy arrays. Every solver in the
package consumes a :class:`BiObjectiveProblem`: a smooth first objective
(training loss) with value and gradient, and a convex non-smooth second
objective (a weighted l1 norm) with value and proximal operator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Literal, Protocol, runtime_checkable

import numpy as np

FULL = "full"

DirectionLabel = Literal["initial", "loss-direction", "sparsity-direction", "ws"]
DIRECTION_LABELS = ("initial", "loss-direction", "sparsity-direction", "ws")


class DimensionError(ValueError):
    """Raised when a parameter vector does not match the problem dimension."""


class NonFiniteError(FloatingPointError):
    """Raised when an objective, gradient or iterate stops being finite."""


class DivergenceError(RuntimeError):
    """Raised by solvers when the loss blows up relative to its start value."""


def as_param_vector(values, n: int | None = None) -> np.ndarray:
    """Return ``values`` as a finite 1-D float64 array (copied).

    Raises :class:`DimensionError` if ``n`` is given and does not match, and
    :class:`NonFiniteError` if any entry is NaN or infinite.
    """
    theta = np.array(values, dtype=np.float64).reshape(-1)
    if n is not None and theta.shape[0] != n:
        raise DimensionError(f"expected a parameter vector of length {n}, got {theta.shape[0]}")
    if not np.all(np.isfinite(theta)):
        raise NonFiniteError("parameter vector contains non-finite entries")
    return theta


def check_finite(value: float, what: str) -> float:
    value = float(value)
    if not np.isfinite(value):
        raise NonFiniteError(f"{what} is not finite ({value})")
    return value


@runtime_checkable
class BiObjectiveProblem(Protocol):
    """Two objectives F1 = f1 (smooth) and F2 = g2 = l1_weight * ||.||_1.

    ``batch`` is either :data:`FULL` (deterministic, whole training set) or a
    problem-specific minibatch object.
    """

    n: int
    l1_weight: float

    def eval_f1(self, theta: np.ndarray, batch=FULL) -> float: ...

    def grad_f1(self, theta: np.ndarray, batch=FULL) -> np.ndarray: ...

    def value_and_grad_f1(self, theta: np.ndarray, batch=FULL) -> tuple[float, np.ndarray]: ...

    def eval_g2(self, theta: np.ndarray) -> float: ...

    def prox_g2(self, theta: np.ndarray, step: float) -> np.ndarray: ...

    def batch_size(self, batch=FULL) -> int: ...


@dataclass(frozen=True)
class ParetoPoint:
    """An evaluated point of a front approximation."""

    theta: np.ndarray
    f1_train: float
    g2: float
    index: int = 0
    f1_test: float | None = None
    acc_train: float | None = None
    acc_test: float | None = None
    l1_unscaled: float | None = None
    grad_evals_cum: int | None = None

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f1_train, self.g2)


def evaluate(
    problem: BiObjectiveProblem,
    theta,
    test_problem: BiObjectiveProblem | None = None,
    index: int = 0,
    grad_evals_cum: int | None = None,
) -> ParetoPoint:
    """Evaluate both objectives of ``problem`` at ``theta`` on the full training set.

    If ``test_problem`` is given its loss is stored as ``f1_test``. Accuracies
    are filled in when the problems expose an ``accuracy(theta)`` method.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.shape[0] != problem.n:
        raise DimensionError(f"expected a parameter vector of length {problem.n}, got shape {theta.shape}")
    f1 = check_finite(problem.eval_f1(theta, FULL), "f1 (training loss)")
    g2 = check_finite(problem.eval_g2(theta), "g2 (scaled l1 norm)")
    f1_test = acc_train = acc_test = None
    if hasattr(problem, "accuracy"):
        acc_train = float(problem.accuracy(theta))
    if test_problem is not None:
        f1_test = check_finite(test_problem.eval_f1(theta, FULL), "f1 (test loss)")
        if hasattr(test_problem, "accuracy"):
            acc_test = float(test_problem.accuracy(theta))
    return ParetoPoint(
        theta=theta.copy(),
        f1_train=f1,
        g2=g2,
        index=index,
        f1_test=f1_test,
        acc_train=acc_train,
        acc_test=acc_test,
        l1_unscaled=float(np.abs(theta).sum()),
        grad_evals_cum=grad_evals_cum,
    )


def dominates(p: ParetoPoint, q: ParetoPoint) -> bool:
    """True iff ``p`` is no worse than ``q`` in both objectives and better in one."""
    return (
        p.f1_train <= q.f1_train
        and p.g2 <= q.g2
        and (p.f1_train < q.f1_train or p.g2 < q.g2)
    )


@dataclass
class Trace:
    """Per-iteration solver log plus the budget counters used for comparisons."""

    rows: list[tuple[int, float, float, float, float]] = field(default_factory=list)
    gradient_evals: int = 0
    prox_evals: int = 0
    samples_touched: int = 0

    def record(self, f1: float, f2: float, norm_d: float, lambda_star: float) -> None:
        self.rows.append((len(self.rows), float(f1), float(f2), float(norm_d), float(lambda_star)))

    def count_gradient(self, samples: int) -> None:
        self.gradient_evals += 1
        self.samples_touched += int(samples)

    @property
    def f1(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def f2(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def norm_d(self) -> np.ndarray:
        return np.array([r[3] for r in self.rows])


@dataclass
class FrontArchive:
    """Ordered collection of front points, each tagged with the leg that produced it."""

    points: list[ParetoPoint] = field(default_factory=list)
    direction_labels: list[str] = field(default_factory=list)
    trace: Trace | None = field(default=None, repr=False, compare=False)

    def append(self, point: ParetoPoint, label: str) -> None:
        if label not in DIRECTION_LABELS:
            raise ValueError(f"unknown direction label {label!r}")
        self.points.append(point)
        self.direction_labels.append(label)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[ParetoPoint]:
        return iter(self.points)

    def __getitem__(self, i: int) -> ParetoPoint:
        return self.points[i]

    def objectives(self) -> np.ndarray:
        """(k, 2) array of (f1_train, g2)."""
        if not self.points:
            return np.zeros((0, 2))
        return np.array([p.objectives for p in self.points], dtype=np.float64)

    def select(self, label: str) -> FrontArchive:
        out = FrontArchive()
        for p, lab in zip(self.points, self.direction_labels):
            if lab == label:
                out.append(p, lab)
        return out

    def sorted_by_g2(self) -> FrontArchive:
        order = sorted(range(len(self)), key=lambda i: (self.points[i].g2, self.points[i].f1_train))
        out = FrontArchive()
        for i in order:
            out.append(self.points[i], self.direction_labels[i])
        return out

    def copy(self) -> FrontArchive:
        return FrontArchive(list(self.points), list(self.direction_labels))
