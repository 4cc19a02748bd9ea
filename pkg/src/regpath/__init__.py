"""Loss vs. l1 regularization paths by multiobjective proximal-gradient continuation."""
from .baselines import WsConfig, ista_oracle, lasso_kkt_residual, lasso_oracle_front, ws_solve, ws_sweep
from .continuation import (
    ContinuationConfig,
    continuation_run,
    front_filter_nondominated,
    front_slope,
    predictor_gradient,
    predictor_shrink,
)
from .core import (
    FULL,
    BiObjectiveProblem,
    DimensionError,
    DivergenceError,
    FrontArchive,
    NonFiniteError,
    ParetoPoint,
    Trace,
    dominates,
    evaluate,
)
from .metrics import ReferencePoint, budget_report, default_reference, hypervolume_2d, max_gap
from .mpg import DirectionResult, SolverConfig, criticality_residual, direction_subproblem, mpg_solve
from .optim import Adam, AdamConfig
from .problems import LassoProblem, MlpProblem, make_lasso_instance
from .prox import ProxSpec, prox_scaled_l1, soft_threshold

__version__ = "0.1.0"
