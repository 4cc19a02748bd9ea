"""Turn a validated :class:`ExperimentConfig` into problems, start vectors and a front."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import ws_sweep
from .config import ExperimentConfig, materialize
from .continuation import continuation_run
from .core import FrontArchive, Trace
from .data import Dataset, SplitSpec, load_iris, load_mnist_dir, minibatches, split
from .nn import MlpArchitecture, mlp_init
from .problems import LassoProblem, MlpProblem, make_lasso_instance

log = logging.getLogger(__name__)


@dataclass
class Setup:
    problem: LassoProblem | MlpProblem
    test_problem: MlpProblem | None = None
    train: Dataset | None = None


@dataclass
class Outcome:
    archive: FrontArchive = field(default_factory=FrontArchive)
    trace: Trace = field(default_factory=Trace)
    error: BaseException | None = None


def load_dataset(name: str, path) -> Dataset:
    path = Path(path)
    if name == "iris":
        return load_iris(path)
    if path.is_dir():
        return load_mnist_dir(path)
    raise FileNotFoundError(f"MNIST needs a directory holding the four IDX files, got {path}")


def build_problem(cfg: ExperimentConfig) -> Setup:
    """Build the training (and, for MLPs, test) problem of a materialized config."""
    spec = cfg.problem
    if spec.kind == "lasso":
        problem = make_lasso_instance(
            rows=spec.rows, cols=spec.cols, seed=spec.instance_seed, noise=spec.noise,
            nonzeros=spec.nonzeros, l1_weight=spec.l1_weight,
        )
        return Setup(problem)
    ds = load_dataset(spec.dataset, cfg.paths.data)
    train, test = split(ds, SplitSpec(spec.train_fraction, spec.split_seed))
    if spec.max_train_samples is not None:
        train = train.head(spec.max_train_samples)
    arch = MlpArchitecture(tuple(spec.arch))
    problem = MlpProblem(arch, train, spec.l1_weight)
    # both objectives share the training-set weight so g2 values are comparable
    test_problem = MlpProblem(arch, test, problem.l1_weight) if len(test) else None
    return Setup(problem, test_problem, train)


def start_vector(cfg: ExperimentConfig, problem, seed: int) -> np.ndarray:
    init = cfg.init
    if init.kind == "zero":
        return np.zeros(problem.n)
    if init.kind == "least_squares":
        return init.fraction * problem.least_squares()
    if isinstance(problem, MlpProblem):
        return mlp_init(problem.arch, init.scale, seed)
    return np.random.default_rng(seed).uniform(-init.scale, init.scale, problem.n)


def prepare(cfg: ExperimentConfig, base_dir, seed: int | None = None) -> tuple[ExperimentConfig, Setup]:
    """Materialize ``cfg`` and build its problems (``eta = "auto"`` needs the built problem)."""
    # eta does not influence the problem, so a placeholder constant is enough to build it
    setup = build_problem(materialize(cfg, base_dir, seed, lipschitz=1.0))
    resolved = materialize(cfg, base_dir, seed, lipschitz=getattr(setup.problem, "lipschitz", None))
    return resolved, setup


def execute(cfg: ExperimentConfig, setup: Setup) -> Outcome:
    """Run the configured method. Exceptions are captured so partial results survive."""
    out = Outcome()
    problem = setup.problem
    batches = None
    if cfg.mode.kind == "stochastic":
        batches = minibatches(setup.train, cfg.mode.batch_size, cfg.seed)
    try:
        if cfg.method.kind == "continuation":
            continuation_run(
                problem, start_vector(cfg, problem, cfg.seed), cfg.method.build(cfg.seed),
                setup.test_problem, batches, out.trace, out.archive,
            )
        else:
            ws_sweep(
                problem, cfg.method.build(cfg.seed), lambda s: start_vector(cfg, problem, s),
                setup.test_problem, batches, out.trace, out.archive,
            )
    except Exception as exc:  # reported by the caller together with the partial front
        log.error("run failed: %s", exc)
        out.error = exc
    return out
