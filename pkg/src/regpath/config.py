"""Declarative experiment configuration: a TOML file validated by pydantic.

Layout (every table except ``problem`` and ``method`` is optional)::

    seed = 0
    precision = "double"

    [problem]            # kind = "lasso" | "mlp"
    [mode]               # kind = "deterministic" | "stochastic"
    [method]             # kind = "continuation" | "ws"
    [method.adam]
    [init]               # kind = "uniform" | "zero" | "least_squares"
    [paths]

Unknown keys are rejected everywhere. :func:`materialize` fills in every
default that depends on other fields so that the written copy reproduces the
run on its own.
"""
from __future__ import annotations

import sys
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .baselines import WsConfig
from .continuation import ContinuationConfig
from .optim import AdamConfig

DATASET_ARCH = {"iris": (4, 4, 4, 3), "mnist": (784, 20, 20, 10)}
DATASET_SHAPE = {"iris": (4, 3), "mnist": (784, 10)}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` holds ``(field path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = errors
        super().__init__("\n".join(f"{path}: {msg}" for path, msg in errors))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LassoSpec(_Strict):
    kind: Literal["lasso"]
    rows: int = Field(20, ge=1)
    cols: int = Field(10, ge=1)
    noise: float = Field(0.01, ge=0)
    nonzeros: int | None = Field(None, ge=0)
    instance_seed: int | None = None
    l1_weight: float | None = Field(None, gt=0)


class MlpSpec(_Strict):
    kind: Literal["mlp"]
    dataset: Literal["iris", "mnist"]
    arch: list[int] | None = None
    train_fraction: float = Field(0.8, gt=0, lt=1)
    split_seed: int | None = None
    max_train_samples: int | None = Field(None, ge=1)
    l1_weight: float | None = Field(None, gt=0)

    @model_validator(mode="after")
    def _arch_fits_dataset(self):
        if self.arch is not None:
            if len(self.arch) < 2 or min(self.arch) < 1:
                raise ValueError("arch needs at least 2 positive layer sizes")
            d, k = DATASET_SHAPE[self.dataset]
            if (self.arch[0], self.arch[-1]) != (d, k):
                raise ValueError(f"{self.dataset} needs arch starting with {d} and ending with {k}")
        return self


class DeterministicMode(_Strict):
    kind: Literal["deterministic"] = "deterministic"


class StochasticMode(_Strict):
    kind: Literal["stochastic"]
    batch_size: int = Field(64, ge=1)


class AdamSpec(_Strict):
    lr: float = Field(1e-3, gt=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)

    def build(self) -> AdamConfig:
        return AdamConfig(lr=self.lr, beta1=self.beta1, beta2=self.beta2, epsilon=self.epsilon)


class ContinuationSpec(_Strict):
    kind: Literal["continuation"]
    n_cont: int = Field(44, ge=1)
    predictor_iters: int = Field(7, ge=1)
    corrector_iters: int = Field(20, ge=1)
    init_iters: int = Field(500, ge=1)
    # "auto" means 1/L and is only available for LASSO problems
    eta: float | Literal["auto"] = 1e-2
    direction: Literal["toward_loss", "toward_sparsity", "both"] = "both"
    predictor: Literal["adam", "gd"] = "adam"
    slope_stop: float | None = Field(None, gt=0)
    shrink_iters: int | None = Field(None, ge=1)
    shrink_weight: float | None = Field(None, ge=0)
    corrector_step: float | None = Field(None, gt=0)
    direction_tol: float | None = Field(None, gt=0)
    dual_tol: float = Field(1e-3, gt=0)
    sparsity_points: int | None = Field(None, ge=0)
    adam: AdamSpec = AdamSpec()

    @model_validator(mode="after")
    def _eta_positive(self):
        if self.eta != "auto" and not self.eta > 0:
            raise ValueError("eta must be > 0 or \"auto\"")
        return self

    def build(self, seed: int) -> ContinuationConfig:
        if self.eta == "auto":
            raise ValueError("eta is still \"auto\"; materialize the config first")
        return ContinuationConfig(
            n_cont=self.n_cont,
            predictor_iters=self.predictor_iters,
            corrector_iters=self.corrector_iters,
            init_iters=self.init_iters,
            eta=self.eta,
            direction=self.direction,
            adam=self.adam.build(),
            slope_stop=self.slope_stop,
            seed=seed,
            predictor=self.predictor,
            shrink_iters=self.shrink_iters,
            shrink_weight=self.shrink_weight,
            corrector_step=self.corrector_step,
            direction_tol=self.direction_tol,
            dual_tol=self.dual_tol,
            sparsity_points=self.sparsity_points,
        )


class WsSpec(_Strict):
    kind: Literal["ws"]
    n_lambda: int = Field(44, ge=1)
    iters_per_lambda: int = Field(200, ge=1)
    warm_start: bool = False
    adam: AdamSpec = AdamSpec()

    def build(self, seed: int) -> WsConfig:
        return WsConfig(
            n_lambda=self.n_lambda,
            iters_per_lambda=self.iters_per_lambda,
            adam=self.adam.build(),
            seed=seed,
            warm_start=self.warm_start,
        )


class InitSpec(_Strict):
    """Start vector: uniform(-scale, scale), zeros, or ``fraction`` times the least-squares solution."""

    kind: Literal["uniform", "zero", "least_squares"] = "uniform"
    scale: float = Field(1e-2, ge=0)
    fraction: float = 0.5


class PathsSpec(_Strict):
    data: str | None = None
    output_dir: str = "runs"


Problem = Annotated[Union[LassoSpec, MlpSpec], Field(discriminator="kind")]
Mode = Annotated[Union[DeterministicMode, StochasticMode], Field(discriminator="kind")]
Method = Annotated[Union[ContinuationSpec, WsSpec], Field(discriminator="kind")]


class ExperimentConfig(_Strict):
    seed: int = 0
    precision: Literal["double"] = "double"
    problem: Problem
    mode: Mode = DeterministicMode()
    method: Method
    init: InitSpec = InitSpec()
    paths: PathsSpec = PathsSpec()

    @model_validator(mode="after")
    def _cross_checks(self):
        lasso = self.problem.kind == "lasso"
        if lasso and self.mode.kind == "stochastic":
            raise ValueError("LASSO problems only support deterministic mode")
        if not lasso and self.init.kind == "least_squares":
            raise ValueError("init kind \"least_squares\" is only available for LASSO problems")
        if not lasso and self.method.kind == "continuation" and self.method.eta == "auto":
            raise ValueError("eta = \"auto\" is only available for LASSO problems")
        if not lasso and self.paths.data is None:
            raise ValueError("paths.data is required for mlp problems")
        return self


def _format_loc(loc) -> str:
    # drop the discriminator tags pydantic inserts for tagged unions
    parts = [str(p) for p in loc if p not in ("lasso", "mlp", "deterministic", "stochastic", "continuation", "ws")]
    return ".".join(parts) or "<root>"


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError([(_format_loc(e["loc"]), e["msg"]) for e in exc.errors()]) from None


def load_config(path) -> ExperimentConfig:
    """Read and validate a TOML config; raises :class:`ConfigError` on any problem."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError([("<file>", f"cannot read {path}: {exc.strerror}")]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("<file>", f"not valid TOML: {exc}")]) from None
    return parse_config(data)


def materialize(cfg: ExperimentConfig, base_dir, seed: int | None = None,
                lipschitz: float | None = None) -> ExperimentConfig:
    """Return ``cfg`` with every implicit value made explicit.

    Relative paths are anchored at ``base_dir``, per-component seeds default
    to the top-level ``seed`` (optionally overridden here), MLP architectures
    default to the dataset's, and ``eta = "auto"`` becomes ``1 / lipschitz``.
    """
    base_dir = Path(base_dir)
    seed = cfg.seed if seed is None else seed
    problem = cfg.problem
    if problem.kind == "lasso":
        problem = problem.model_copy(update={
            "instance_seed": seed if problem.instance_seed is None else problem.instance_seed,
        })
    else:
        problem = problem.model_copy(update={
            "arch": list(DATASET_ARCH[problem.dataset]) if problem.arch is None else problem.arch,
            "split_seed": seed if problem.split_seed is None else problem.split_seed,
        })
    method = cfg.method
    if method.kind == "continuation" and method.eta == "auto":
        if lipschitz is None:
            raise ValueError("eta = \"auto\" needs the problem's Lipschitz constant")
        method = method.model_copy(update={"eta": 1.0 / lipschitz})
    paths = PathsSpec(
        data=None if cfg.paths.data is None else str((base_dir / cfg.paths.data).resolve()),
        output_dir=str((base_dir / cfg.paths.output_dir).resolve()),
    )
    return cfg.model_copy(update={"seed": seed, "problem": problem, "method": method, "paths": paths})


def dump_config(cfg: ExperimentConfig) -> str:
    """TOML text of ``cfg`` with all fields written out (``None`` fields are omitted)."""
    return tomli_w.dumps(cfg.model_dump(mode="python", exclude_none=True))
