"""Linear forecasters sharing one fit/predict contract.

Penalty convention follows the objective

    sum_t (y_t - b0 - sum_i x_it b_i)^2 + lam * sum_i [(1 - alpha)|b_i| + alpha b_i^2]

so ``alpha = 1`` is ridge and ``alpha = 0`` is the LASSO (the reverse of
glmnet and scikit-learn). There is no ``1/n`` or ``1/2`` factor, so values
of ``lam`` are not comparable with those libraries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import numkit
from .errors import ConvergenceError, DomainError

CD_TOL = 1e-8
CD_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class PenaltySpec:
    lam: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.lam >= 0 and np.isfinite(self.lam)):
            raise DomainError(f"lambda must be a finite non-negative number, got {self.lam}")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class PLSDirections:
    """Everything needed to rebuild the PLS factors on new rows.

    ``offsets[d]`` is the amount subtracted from factor ``d`` before it is
    scaled by ``slopes[d]``; ``base`` is the constant the fitted values
    start from.
    """

    loadings: np.ndarray  # (d, q)
    slopes: np.ndarray  # (d,)
    offsets: np.ndarray  # (d,)
    base: float

    @property
    def count(self) -> int:
        return self.slopes.size


@dataclass(frozen=True)
class FittedModel:
    kind: str
    intercept: float
    coefficients: np.ndarray
    standardization: tuple[tuple[float, float], ...] = ()
    tuning: dict[str, Any] | None = None
    directions: PLSDirections | None = None
    fitted: np.ndarray = field(default=None, repr=False)

    @property
    def width(self) -> int:
        return self.coefficients.size


def _standardize(X: np.ndarray):
    mu = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    bad = np.flatnonzero(~(sd > 0))
    if bad.size:
        raise DomainError(f"predictor column {int(bad[0])} has zero variance")
    return (X - mu) / sd, mu, sd


def _linear(kind, X, intercept, coefs, **extra) -> FittedModel:
    m = FittedModel(kind=kind, intercept=float(intercept), coefficients=np.asarray(coefs, dtype=float), **extra)
    object.__setattr__(m, "fitted", predict(m, X))
    return m


def fit_ols(X, y) -> FittedModel:
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    n, q = X.shape
    if n != y.size:
        raise DomainError(f"X has {n} rows but y has {y.size} entries")
    if n <= q + 1:
        raise DomainError(f"OLS needs more than q + 1 = {q + 1} observations, got {n}")
    try:
        beta = numkit.least_squares(np.column_stack([np.ones(n), X]), y)
    except numkit.SingularMatrixError as err:
        col = None if err.column is None else err.column - 1
        raise numkit.SingularMatrixError(f"OLS design is rank deficient at predictor {col}", column=col) from err
    return _linear("ols", X, beta[0], beta[1:])


def _soft(c: float, t: float) -> float:
    if c > t:
        return c - t
    if c < -t:
        return c + t
    return 0.0


def _coordinate_descent(Z, yc, lam, alpha, trace=None):
    """Cyclic coordinate descent on centred data, started from zero."""
    G = Z.T @ Z
    c = Z.T @ yc
    q = c.size
    b = np.zeros(q)
    l1 = 0.5 * lam * (1.0 - alpha)
    l2 = lam * alpha
    delta = np.inf
    for _ in range(CD_MAX_SWEEPS):
        delta = 0.0
        for j in range(q):
            rho = c[j] - G[j] @ b + G[j, j] * b[j]
            new = _soft(rho, l1) / (G[j, j] + l2)
            delta = max(delta, abs(new - b[j]))
            b[j] = new
        if trace is not None:
            trace.append(b.copy())
        if delta < CD_TOL:
            return b
    raise ConvergenceError(f"coordinate descent did not converge in {CD_MAX_SWEEPS} sweeps", last_delta=delta)


def fit_penalised(X, y, p: PenaltySpec, *, standardize: bool = True, trace: list | None = None) -> FittedModel:
    """Minimise the penalised least-squares objective in ``p``.

    Predictors are standardised to zero mean and unit sample deviation
    before penalising; the intercept is never penalised. Ridge (and any
    ``lam == 0`` problem) is solved in closed form, the rest by coordinate
    descent. Coefficients come back in the original units.

    ``trace``, if given, receives the standardised coefficients after every
    coordinate-descent sweep.
    """
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    n, q = X.shape
    if n != y.size:
        raise DomainError(f"X has {n} rows but y has {y.size} entries")
    if n < 2:
        raise DomainError("penalised regression needs at least two observations")
    if standardize:
        Z, mu, sd = _standardize(X)
    else:
        mu, sd = X.mean(axis=0), np.ones(q)
        Z = X - mu
    ybar = y.mean()
    yc = y - ybar
    if p.lam == 0.0:
        b = numkit.least_squares(Z, yc)
    elif p.alpha == 1.0:
        aug = np.vstack([Z, np.sqrt(p.lam) * np.eye(q)])
        b = numkit.least_squares(aug, np.concatenate([yc, np.zeros(q)]))
    else:
        b = _coordinate_descent(Z, yc, p.lam, p.alpha, trace)
    coefs = b / sd
    intercept = ybar - mu @ coefs
    kind = "ridge" if p.alpha == 1.0 else ("lasso" if p.alpha == 0.0 else "enet")
    return _linear(
        kind,
        X,
        intercept,
        coefs,
        standardization=tuple(zip(mu.tolist(), sd.tolist())),
        tuning={"lambda": p.lam, "alpha": p.alpha},
    )


def _pls_rebuild(X: np.ndarray, dirs: PLSDirections, upto: int | None = None) -> np.ndarray:
    yhat = np.full(X.shape[0], dirs.base)
    for d in range(dirs.count if upto is None else upto):
        yhat = yhat + dirs.slopes[d] * (X @ dirs.loadings[d] - dirs.offsets[d])
    return yhat


def fit_pls(X, y, d: int, *, center_each_direction: bool = True) -> FittedModel:
    """Partial least squares with ``d`` directions built from marginal regressions.

    Each direction regresses the current residual on every predictor
    separately (slope ``cov / var``), sums the predictors with those slopes
    into a factor, and regresses the residual on the factor.

    ``d`` normally stays at or below the number of predictors; larger values
    keep boosting the residual and are accepted.

    By default each factor enters the fit centred on its training mean,
    which keeps predictions invariant to shifting a predictor and makes the
    fit converge to OLS as ``d`` grows. With
    ``center_each_direction=False`` only the first factor sets the intercept
    (``ybar - beta_1 * zbar_1``) and later factors are added uncentred. The
    two agree for ``d == 1``.
    """
    X = numkit.as_matrix(X)
    y = numkit.as_vector(y, "y")
    n, q = X.shape
    if n != y.size:
        raise DomainError(f"X has {n} rows but y has {y.size} entries")
    if n < 2:
        raise DomainError("PLS needs at least two observations")
    if q == 0:
        raise DomainError("PLS needs at least one predictor")
    if d < 1:
        raise DomainError(f"number of directions must be at least 1, got {d}")
    xc = X - X.mean(axis=0)
    var_x = (xc * xc).sum(axis=0) / (n - 1)
    bad = np.flatnonzero(~(var_x > 0))
    if bad.size:
        raise DomainError(f"predictor column {int(bad[0])} has zero variance")

    loadings = np.zeros((d, q))
    slopes = np.zeros(d)
    offsets = np.zeros(d)
    base = 0.0
    yhat = None
    eps = y.copy()
    for k in range(d):
        ec = eps - eps.mean()
        phi = (xc.T @ ec) / (n - 1) / var_x
        z = X @ phi
        zbar = z.mean()
        zc = z - zbar
        var_z = zc @ zc / (n - 1)
        beta = (zc @ ec) / (n - 1) / var_z if var_z > 0 else 0.0
        loadings[k] = phi
        slopes[k] = beta
        if k == 0:
            base = float(y.mean())
            offsets[k] = zbar
        else:
            offsets[k] = zbar if center_each_direction else 0.0
        dirs = PLSDirections(loadings[: k + 1].copy(), slopes[: k + 1].copy(), offsets[: k + 1].copy(), base)
        yhat = _pls_rebuild(X, dirs)
        eps = y - yhat

    dirs = PLSDirections(loadings, slopes, offsets, base)
    coefs = slopes @ loadings
    intercept = base - slopes @ offsets
    m = FittedModel(kind="pls", intercept=float(intercept), coefficients=coefs, tuning={"d": d}, directions=dirs)
    object.__setattr__(m, "fitted", yhat)
    return m


def fit_ar1(y) -> FittedModel:
    """AR(1) on an already differenced series: ``y_t = c + phi * y_{t-1}``."""
    y = numkit.as_vector(y, "y")
    if y.size < 3:
        raise DomainError("AR(1) needs at least three observations")
    lag, target = y[:-1], y[1:]
    if np.ptp(lag) == 0.0:
        intercept, slope = target.mean(), 0.0
    else:
        intercept, slope = numkit.least_squares(np.column_stack([np.ones(lag.size), lag]), target)
    m = FittedModel(kind="ar", intercept=float(intercept), coefficients=np.array([float(slope)]))
    object.__setattr__(m, "fitted", predict(m, lag))
    return m


def predict(m: FittedModel, X_new) -> np.ndarray:
    """Predict rows of ``X_new``; for AR models pass the lagged responses."""
    X_new = numkit.as_matrix(X_new, "X_new")
    if X_new.shape[1] != m.width:
        raise DomainError(f"model expects {m.width} columns, got {X_new.shape[1]}")
    if m.directions is not None:
        return _pls_rebuild(X_new, m.directions)
    return m.intercept + X_new @ m.coefficients


def penalised_objective(X, y, coefficients, intercept, p: PenaltySpec) -> float:
    resid = numkit.as_vector(y, "y") - intercept - numkit.as_matrix(X) @ np.asarray(coefficients, dtype=float)
    b = np.asarray(coefficients, dtype=float)
    return float(resid @ resid + p.lam * np.sum((1.0 - p.alpha) * np.abs(b) + p.alpha * b * b))
