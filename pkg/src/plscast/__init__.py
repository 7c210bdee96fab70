"""Rolling-origin comparison of linear GDP nowcasting models.

Partial least squares built from marginal regressions, OLS, ridge, LASSO
and elastic net, an AR(1) benchmark, Hampel filtering of the inputs and a
past-only cross-validation harness.
"""

from .errors import (
    AlignmentError,
    ConfigError,
    ConvergenceError,
    DataError,
    DomainError,
    GapError,
    NumericalError,
    ParseError,
    PlscastError,
    SingularMatrixError,
)
from .evalharness import (
    CvReport,
    FoldPlan,
    ModelSpec,
    cumulative_abs_error,
    mae,
    make_fold_plan,
    median_ensemble,
    with_ensemble,
    rmse,
    run_cv,
)
from .models import FittedModel, PenaltySpec, fit_ar1, fit_ols, fit_penalised, fit_pls, predict
from .preprocess import HampelConfig, LevelTable, SeriesFrame, TransformSpec, apply_transform, build_frame, hampel_filter
from .synthgen import ScenarioSpec, generate, regime_shift_scenario, sweep
from .tuning import LambdaPath, lambda_grid, select_lambda

__version__ = "0.1.0"
