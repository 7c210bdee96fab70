"""Choice of the penalty weight by rolling-origin CV or AIC."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .errors import ConfigError, DomainError
from .models import PenaltySpec, fit_penalised, predict

RULES = ("cv_min", "cv_1se", "aic")
METRICS = ("mae", "rmse")


@dataclass
class LambdaPath:
    grid: np.ndarray
    mean_error: np.ndarray
    std_error: np.ndarray
    aic: np.ndarray
    rule: str
    choices: dict[str, float] = field(default_factory=dict)

    @property
    def lam(self) -> float:
        return self.choices[self.rule]

    def error_at(self, lam: float) -> float:
        return float(self.mean_error[int(np.flatnonzero(self.grid == lam)[0])])


def lambda_max(X, y) -> float:
    """Smallest LASSO penalty that zeroes every standardised slope."""
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    sd = X.std(axis=0, ddof=1)
    if X.shape[1] == 0 or np.any(~(sd > 0)):
        raise DomainError("lambda grid needs non-constant predictor columns")
    Z = (X - X.mean(axis=0)) / sd
    return float(2.0 * np.max(np.abs(Z.T @ (y - y.mean()))))


def lambda_grid(X, y, count: int = 50, ratio: float = 1e-3) -> np.ndarray:
    if count < 2:
        raise ConfigError("lambda grid needs at least two points")
    if not 0.0 < ratio < 1.0:
        raise ConfigError("lambda grid ratio must lie in (0, 1)")
    top = lambda_max(X, y)
    if top == 0.0:
        raise DomainError("response is uncorrelated with every predictor; lambda_max is zero")
    grid = top * np.logspace(0.0, np.log10(ratio), count)
    grid[0], grid[-1] = top, top * ratio
    return grid


def _fold_losses(X, y, p: PenaltySpec, inner_folds: int, metric: str) -> np.ndarray:
    n = y.size
    m = n - inner_folds
    losses = np.empty(inner_folds)
    for j in range(inner_folds):
        fit = fit_penalised(X[j: j + m], y[j: j + m], p)
        e = y[j + m] - predict(fit, X[j + m: j + m + 1])[0]
        losses[j] = abs(e) if metric == "mae" else e * e
    return losses


def _ridge_fold_losses(X, y, grid: np.ndarray, inner_folds: int, metric: str) -> np.ndarray:
    """Ridge losses for the whole grid at once from one SVD per fold.

    Same standardisation and closed form as ``fit_penalised``; results agree
    with it to rounding error.
    """
    n = y.size
    m = n - inner_folds
    losses = np.empty((grid.size, inner_folds))
    for j in range(inner_folds):
        Xt, yt = X[j: j + m], y[j: j + m]
        mu = Xt.mean(axis=0)
        sd = Xt.std(axis=0, ddof=1)
        if np.any(~(sd > 0)):
            raise DomainError("predictor with zero variance in an inner training window")
        Z = (Xt - mu) / sd
        ybar = yt.mean()
        U, s, Vt = np.linalg.svd(Z, full_matrices=False)
        uty = U.T @ (yt - ybar)
        znew = (X[j + m] - mu) / sd
        proj = znew @ Vt.T
        shrink = s / (s[None, :] ** 2 + grid[:, None])
        e = y[j + m] - ybar - (shrink * uty) @ proj
        losses[:, j] = np.abs(e) if metric == "mae" else e * e
    return losses


def _summarise(losses: np.ndarray, metric: str) -> tuple[float, float]:
    k = losses.size
    se = float(np.std(losses, ddof=1) / np.sqrt(k))
    if metric == "mae":
        return float(np.mean(losses)), se
    rmse = float(np.sqrt(np.mean(losses)))
    return rmse, (se / (2.0 * rmse) if rmse > 0 else 0.0)


def _check_inner(X, y, inner_folds: int):
    if inner_folds < 2:
        raise ConfigError(f"need at least 2 inner folds, got {inner_folds}")
    m = y.size - inner_folds
    if m < X.shape[1] + 2:
        raise ConfigError(
            f"inner training window of {m} observations is too short for {X.shape[1]} predictors"
        )


def inner_cv_error(X, y, alpha: float, lam: float, inner_folds: int = 8, metric: str = "mae") -> tuple[float, float]:
    """Mean rolling-origin error at one ``lam`` and its standard error."""
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    _check_inner(X, y, inner_folds)
    return _summarise(_fold_losses(X, y, PenaltySpec(lam, alpha), inner_folds, metric), metric)


def select_lambda(
    X,
    y,
    alpha: float,
    rule: str = "cv_min",
    inner_folds: int = 8,
    *,
    grid=None,
    count: int = 50,
    ratio: float = 1e-3,
    metric: str = "mae",
    threads: int = 1,
) -> LambdaPath:
    """Evaluate every ``lam`` on the grid and pick one by ``rule``.

    The CV rules use the same past-only rolling scheme as the outer
    evaluation, with ``inner_folds`` one-step-ahead test points at the end
    of the window. ``cv_1se`` takes the largest ``lam`` whose mean error is
    within one standard error of the minimum. ``aic`` fits the whole window
    and scores ``n ln(RSS/n) + 2k`` with ``k`` = nonzero slopes + 1.
    """
    if rule not in RULES:
        raise ConfigError(f"unknown rule {rule!r}; expected one of {RULES}")
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}; expected one of {METRICS}")
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    grid = lambda_grid(X, y, count, ratio) if grid is None else np.asarray(grid, dtype=float)
    if grid.size < 1 or np.any(np.diff(grid) >= 0) or np.any(grid < 0):
        raise ConfigError("lambda grid must be non-negative and strictly decreasing")
    _check_inner(X, y, inner_folds)

    def one(lam):
        return _summarise(_fold_losses(X, y, PenaltySpec(float(lam), alpha), inner_folds, metric), metric)

    if alpha == 1.0 and np.all(grid > 0):
        stats = [_summarise(row, metric) for row in _ridge_fold_losses(X, y, grid, inner_folds, metric)]
    elif threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            stats = list(pool.map(one, grid))
    else:
        stats = [one(lam) for lam in grid]
    mean_error = np.array([s[0] for s in stats])
    std_error = np.array([s[1] for s in stats])

    n = y.size
    aic = np.empty(grid.size)
    for i, lam in enumerate(grid):
        fit = fit_penalised(X, y, PenaltySpec(float(lam), alpha))
        rss = float(np.sum((y - fit.fitted) ** 2))
        k = int(np.count_nonzero(fit.coefficients)) + 1
        aic[i] = n * np.log(rss / n) + 2 * k if rss > 0 else -np.inf

    best = int(np.argmin(mean_error))
    within = np.flatnonzero(mean_error <= mean_error[best] + std_error[best])
    choices = {
        "cv_min": float(grid[best]),
        "cv_1se": float(grid[int(within[0])]),
        "aic": float(grid[int(np.argmin(aic))]),
    }
    return LambdaPath(grid=grid, mean_error=mean_error, std_error=std_error, aic=aic, rule=rule, choices=choices)
