"""Rolling-origin out-of-sample evaluation.

Each fold trains on a fixed-length window of past observations and
predicts the next one. The predictor row of the test quarter is used as
it stands (nowcasting with a complete quarter of indicator data, not an
ex-ante forecast); the AR benchmark uses the previous response instead.

Indices are zero-based throughout: with ``n = 95`` and ``k = 36`` the first
fold trains on rows 0..58 and tests row 59, i.e. the 60th observation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import numkit
from .errors import ConfigError, DataError, NumericalError
from .models import PenaltySpec, fit_ar1, fit_ols, fit_pls, fit_penalised, predict
from .preprocess import SeriesFrame
from .tuning import select_lambda

MODEL_KINDS = ("ols", "ridge", "lasso", "enet", "pls", "ar")


@dataclass(frozen=True)
class Fold:
    train_start: int
    train_end: int
    test_index: int


@dataclass(frozen=True)
class FoldPlan:
    n: int
    k: int
    folds: tuple[Fold, ...]
    expanding: bool = False

    @property
    def m(self) -> int:
        return self.n - self.k


def make_fold_plan(n: int, k: int, expanding: bool = False) -> FoldPlan:
    """Plan ``k`` one-step-ahead folds over ``n`` observations.

    Fold ``j`` trains on ``[j, j + m - 1]`` and tests ``j + m`` with
    ``m = n - k``. With ``expanding=True`` every window starts at 0
    instead (offered for comparison only).
    """
    if not 2 <= k <= n - 3:
        raise ConfigError(f"fold count k={k} must lie in [2, n - 3] = [2, {n - 3}]")
    m = n - k
    folds = tuple(Fold(0 if expanding else j, j + m - 1, j + m) for j in range(k))
    return FoldPlan(n=n, k=k, folds=folds, expanding=expanding)


@dataclass(frozen=True)
class ModelSpec:
    """One forecaster in a comparison.

    For penalised kinds, ``lam=None`` means tune it by ``rule`` on every
    training window (or on the first one only with ``retune="once"``).
    ``alpha`` is only read for ``enet``; ridge and lasso fix it at 1 and 0.
    """

    name: str
    kind: str
    alpha: float | None = None
    lam: float | None = None
    rule: str = "cv_min"
    inner_folds: int = 8
    grid_count: int = 50
    grid_ratio: float = 1e-3
    metric: str = "mae"
    retune: str = "per_fold"
    d: int = 1

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"model {self.name!r}: unknown kind {self.kind!r}")
        if self.retune not in ("per_fold", "once"):
            raise ConfigError(f"model {self.name!r}: retune must be 'per_fold' or 'once'")
        if self.kind == "pls" and self.d < 1:
            raise ConfigError(f"model {self.name!r}: PLS needs d >= 1")
        if self.kind == "enet" and self.alpha is None:
            raise ConfigError(f"model {self.name!r}: elastic net needs alpha")

    @property
    def penalty_alpha(self) -> float:
        return {"ridge": 1.0, "lasso": 0.0}.get(self.kind, self.alpha)


@dataclass
class ModelResult:
    name: str
    predictions: np.ndarray
    errors: np.ndarray
    mae: float | None
    rmse: float | None
    cumabs: np.ndarray
    failures: dict[int, str] = field(default_factory=dict)
    lambdas: list[float | None] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.failures


@dataclass
class CvReport:
    periods: list[str]
    actual: np.ndarray
    models: dict[str, ModelResult]
    ensembles: dict[str, ModelResult] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.actual.size

    def all_results(self) -> dict[str, ModelResult]:
        return {**self.models, **self.ensembles}

    def window(self, start: int, stop: int) -> "CvReport":
        """Sub-report over folds ``start:stop``; metrics and paths restart."""
        sl = slice(start, stop)

        def cut(r: ModelResult) -> ModelResult:
            fails = {j - start: msg for j, msg in r.failures.items() if start <= j < stop}
            return _result(r.name, r.predictions[sl], self.actual[sl], fails, r.lambdas[sl])

        return CvReport(
            periods=self.periods[sl],
            actual=self.actual[sl],
            models={name: cut(r) for name, r in self.models.items()},
            ensembles={name: cut(r) for name, r in self.ensembles.items()},
            metadata={**self.metadata, "window": [start, stop]},
        )

    def split(self, marker: str) -> tuple["CvReport", "CvReport"]:
        """Split at the first test period ``>= marker`` (both ``YYYYQn``)."""
        cut = next((j for j, p in enumerate(self.periods) if p >= marker), self.k)
        return self.window(0, cut), self.window(cut, self.k)


def mae(errors) -> float:
    e = numkit.as_vector(errors, "errors")
    if e.size == 0:
        raise numkit.DomainError("MAE of an empty error vector")
    return float(np.mean(np.abs(e)))


def rmse(errors) -> float:
    e = numkit.as_vector(errors, "errors")
    if e.size == 0:
        raise numkit.DomainError("RMSE of an empty error vector")
    return float(np.sqrt(np.mean(e * e)))


def cumulative_abs_error(errors) -> np.ndarray:
    return np.cumsum(np.abs(np.asarray(errors, dtype=float)))


def _result(name, predictions, actual, failures, lambdas) -> ModelResult:
    predictions = np.asarray(predictions, dtype=float)
    errors = actual - predictions
    if failures:
        return ModelResult(name, predictions, errors, None, None, np.full(errors.size, np.nan), failures, lambdas)
    if errors.size == 0:
        return ModelResult(name, predictions, errors, None, None, errors.copy(), {}, lambdas)
    return ModelResult(name, predictions, errors, mae(errors), rmse(errors), cumulative_abs_error(errors), {}, lambdas)


def _fit_predict(spec: ModelSpec, frame: SeriesFrame, fold: Fold, lam_fixed):
    tr = slice(fold.train_start, fold.train_end + 1)
    t = fold.test_index
    y = frame.y[tr]
    if spec.kind == "ar":
        model = fit_ar1(y)
        return float(predict(model, [frame.y[t - 1]])[0]), None
    X = frame.X[tr]
    x_new = frame.X[t: t + 1]
    if spec.kind == "ols":
        model = fit_ols(X, y)
        lam = None
    elif spec.kind == "pls":
        model = fit_pls(X, y, spec.d)
        lam = None
    else:
        lam = lam_fixed
        if lam is None:
            lam = _tune(spec, X, y)
        model = fit_penalised(X, y, PenaltySpec(lam, spec.penalty_alpha))
    return float(predict(model, x_new)[0]), lam


def _tune(spec: ModelSpec, X, y) -> float:
    path = select_lambda(
        X, y, spec.penalty_alpha, spec.rule, spec.inner_folds,
        count=spec.grid_count, ratio=spec.grid_ratio, metric=spec.metric,
    )
    return path.lam


def run_cv(frame: SeriesFrame, specs: Sequence[ModelSpec], plan: FoldPlan, threads: int = 1) -> CvReport:
    """Refit every model on every training window and score the test point.

    A fit that fails is recorded against its fold; a model with any failed
    fold gets no MAE/RMSE. Configuration errors are not caught.
    """
    if not specs:
        raise ConfigError("no models to evaluate")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError("model names must be unique")
    if frame.n != plan.n:
        raise ConfigError(f"frame has {frame.n} observations but the fold plan expects {plan.n}")
    for s in specs:
        if s.kind != "ar" and frame.q == 0:
            raise ConfigError(f"model {s.name!r} needs predictors but the frame has none")

    fixed: dict[str, float | None] = {}
    for s in specs:
        fixed[s.name] = s.lam
        if s.kind in ("ridge", "lasso", "enet") and s.lam is None and s.retune == "once":
            f0 = plan.folds[0]
            tr = slice(f0.train_start, f0.train_end + 1)
            fixed[s.name] = _tune(s, frame.X[tr], frame.y[tr])

    def run_fold(j: int):
        fold = plan.folds[j]
        out = {}
        for s in specs:
            try:
                out[s.name] = _fit_predict(s, frame, fold, fixed[s.name]) + (None,)
            except (NumericalError, DataError) as err:
                out[s.name] = (np.nan, None, f"{type(err).__name__}: {err}")
        return out

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_fold = list(pool.map(run_fold, range(plan.k)))
    else:
        per_fold = [run_fold(j) for j in range(plan.k)]

    test_idx = [f.test_index for f in plan.folds]
    actual = frame.y[test_idx].copy()
    models = {}
    for s in specs:
        preds = [per_fold[j][s.name][0] for j in range(plan.k)]
        lams = [per_fold[j][s.name][1] for j in range(plan.k)]
        fails = {j: per_fold[j][s.name][2] for j in range(plan.k) if per_fold[j][s.name][2] is not None}
        models[s.name] = _result(s.name, preds, actual, fails, lams)

    f0, fl = plan.folds[0], plan.folds[-1]
    metadata = {
        "n": plan.n,
        "k": plan.k,
        "m": plan.m,
        "window": "expanding" if plan.expanding else "rolling",
        "first_train": [frame.periods[f0.train_start], frame.periods[f0.train_end]],
        "last_train": [frame.periods[fl.train_start], frame.periods[fl.train_end]],
        "test": [frame.periods[f0.test_index], frame.periods[fl.test_index]],
    }
    return CvReport(periods=[frame.periods[i] for i in test_idx], actual=actual, models=models, metadata=metadata)


def median_ensemble(report: CvReport, members: Sequence[str], name: str = "median") -> ModelResult:
    """Per-fold median of the members' point predictions."""
    if not members:
        raise ConfigError("ensemble needs at least one member")
    unknown = [m for m in members if m not in report.models]
    if unknown:
        raise ConfigError(f"unknown ensemble member(s): {', '.join(unknown)}")
    invalid = [m for m in members if not report.models[m].valid]
    if invalid:
        fails = {0: f"member(s) with failed folds: {', '.join(invalid)}"}
        return _result(name, np.full(report.k, np.nan), report.actual, fails, [None] * report.k)
    stacked = np.vstack([report.models[m].predictions for m in members])
    return _result(name, np.median(stacked, axis=0), report.actual, {}, [None] * report.k)


def with_ensemble(report: CvReport, members: Sequence[str], name: str = "median") -> CvReport:
    if name in report.models:
        raise ConfigError(f"ensemble name {name!r} clashes with a model")
    return replace(report, ensembles={**report.ensembles, name: median_ensemble(report, members, name)})
