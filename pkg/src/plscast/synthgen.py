"""Seeded synthetic factor-model data and brute-force reference solvers.

Random numbers come from NumPy's PCG64 bit generator
(``np.random.Generator(np.random.PCG64(seed))``), whose stream is fixed
across platforms for a given seed. Draws are taken in a fixed order:
factor innovations, idiosyncratic predictor noise (row-major), response
noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .models import PenaltySpec
from .periods import quarter_range
from .preprocess import SeriesFrame

BREAK_KINDS = ("level_shock", "loading_flip")


@dataclass(frozen=True)
class ScenarioSpec:
    """Single-factor scenario.

    ``f_t = factor_ar * f_{t-1} + u_t`` with unit-variance innovations,
    ``x_it = loading_i * f_t + idiosyncratic_sd * e_it`` and
    ``y_t = f_t + noise_sd * v_t``. From ``break_at`` (zero-based) on,
    ``level_shock`` adds ``shock_size`` to y and every x for
    ``shock_length`` quarters, while ``loading_flip`` negates the loadings
    of the first ``q // 2`` predictors for good.
    """

    n: int = 95
    q: int = 14
    factor_loadings: tuple[float, ...] | None = None
    noise_sd: float = 0.5
    idiosyncratic_sd: float = 1.0
    factor_ar: float = 0.5
    break_at: int | None = None
    break_kind: str = "level_shock"
    shock_size: float = 0.0
    shock_length: int = 4
    seed: int = 0
    start: str = "2000Q2"

    def __post_init__(self):
        if self.n < 2 or self.q < 0:
            raise ConfigError("scenario needs n >= 2 and q >= 0")
        if self.factor_loadings is not None and len(self.factor_loadings) != self.q:
            raise ConfigError(f"expected {self.q} factor loadings, got {len(self.factor_loadings)}")
        if self.noise_sd < 0 or self.idiosyncratic_sd < 0:
            raise ConfigError("noise standard deviations must be non-negative")
        if not -1 < self.factor_ar < 1:
            raise ConfigError("factor_ar must lie in (-1, 1)")
        if self.break_at is not None and not 0 < self.break_at <= self.n:
            raise ConfigError(f"break_at must lie in (0, {self.n}]")
        if self.break_kind not in BREAK_KINDS:
            raise ConfigError(f"break_kind must be one of {BREAK_KINDS}")
        if self.shock_length < 1:
            raise ConfigError("shock_length must be positive")

    @property
    def loadings(self) -> np.ndarray:
        if self.factor_loadings is None:
            return np.ones(self.q)
        return np.asarray(self.factor_loadings, dtype=float)


def generate(spec: ScenarioSpec) -> SeriesFrame:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    n, q = spec.n, spec.q
    u = rng.standard_normal(n)
    e = rng.standard_normal((n, q))
    v = rng.standard_normal(n)

    f = np.empty(n)
    f[0] = u[0] / np.sqrt(1.0 - spec.factor_ar**2)
    for t in range(1, n):
        f[t] = spec.factor_ar * f[t - 1] + u[t]

    load = np.tile(spec.loadings, (n, 1))
    if spec.break_at is not None and spec.break_kind == "loading_flip":
        load[spec.break_at:, : q // 2] *= -1.0
    X = load * f[:, None] + spec.idiosyncratic_sd * e
    y = f + spec.noise_sd * v
    if spec.break_at is not None and spec.break_kind == "level_shock":
        hit = slice(spec.break_at, spec.break_at + spec.shock_length)
        y[hit] += spec.shock_size
        X[hit] += spec.shock_size

    return SeriesFrame(
        periods=quarter_range(spec.start, n),
        response="y",
        y=y,
        predictors=[f"x{i + 1}" for i in range(q)],
        X=X,
    )


def to_levels(values: np.ndarray, base: float = 100.0) -> np.ndarray:
    """Invert ``log100`` + differencing: one more row than ``values``."""
    values = np.asarray(values, dtype=float)
    head = np.zeros((1,) + values.shape[1:])
    return base * np.exp(np.concatenate([head, np.cumsum(values, axis=0)]) / 100.0)


def oracle_objective(X, y, beta, intercept, p: PenaltySpec) -> float:
    """Penalised least-squares objective, summed term by term."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size or X.shape[1] != beta.size:
        raise DomainError("shape mismatch between X, y and beta")
    rss = 0.0
    for t in range(y.size):
        r = y[t] - intercept
        for i in range(beta.size):
            r -= X[t, i] * beta[i]
        rss += r * r
    pen = 0.0
    for b in beta:
        pen += (1.0 - p.alpha) * abs(b) + p.alpha * b * b
    return rss + p.lam * pen


def lattice_minimum(X, y, p: PenaltySpec, center, half_width: float, points: int = 401):
    """Best objective over a square lattice of two slopes.

    The intercept is profiled out exactly (it is unpenalised, so its optimum
    is the mean residual). Returns ``(value, beta)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[1] != 2:
        raise DomainError("lattice search is for two predictors")
    g0 = center[0] + np.linspace(-half_width, half_width, points)
    g1 = center[1] + np.linspace(-half_width, half_width, points)
    B0, B1 = np.meshgrid(g0, g1, indexing="ij")
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    # residual sum of squares for every lattice point, intercept at its optimum
    rss = (
        yc @ yc
        - 2 * (B0 * (xc[:, 0] @ yc) + B1 * (xc[:, 1] @ yc))
        + B0**2 * (xc[:, 0] @ xc[:, 0])
        + 2 * B0 * B1 * (xc[:, 0] @ xc[:, 1])
        + B1**2 * (xc[:, 1] @ xc[:, 1])
    )
    pen = (1 - p.alpha) * (np.abs(B0) + np.abs(B1)) + p.alpha * (B0**2 + B1**2)
    obj = rss + p.lam * pen
    i, j = np.unravel_index(int(np.argmin(obj)), obj.shape)
    return float(obj[i, j]), np.array([B0[i, j], B1[i, j]])


def oracle_pls(X, y, d: int, center_each_direction: bool = True):
    """Plain-loop PLS fitted values, one marginal regression per direction."""
    X = [list(map(float, row)) for row in np.asarray(X, dtype=float)]
    y = [float(v) for v in y]
    n, q = len(X), len(X[0])

    def avg(v):
        return sum(v) / len(v)

    def cov(a, b):
        ma, mb = avg(a), avg(b)
        return sum((ai - ma) * (bi - mb) for ai, bi in zip(a, b)) / (len(a) - 1)

    cols = [[X[t][i] for t in range(n)] for i in range(q)]
    yhat = None
    eps = list(y)
    for k in range(d):
        phi = [cov(cols[i], eps) / cov(cols[i], cols[i]) for i in range(q)]
        z = [sum(X[t][i] * phi[i] for i in range(q)) for t in range(n)]
        vz = cov(z, z)
        beta = cov(z, eps) / vz if vz > 0 else 0.0
        if k == 0:
            yhat = [avg(y) - beta * avg(z) + beta * z[t] for t in range(n)]
        elif center_each_direction:
            zbar = avg(z)
            yhat = [yhat[t] + beta * (z[t] - zbar) for t in range(n)]
        else:
            yhat = [yhat[t] + beta * z[t] for t in range(n)]
        eps = [y[t] - yhat[t] for t in range(n)]
    return np.array(yhat)


@dataclass
class SweepResult:
    """Per-seed MAEs of a multi-seed comparison, plus sub-window MAEs."""

    mae: dict[str, np.ndarray] = field(default_factory=dict)
    pre: dict[str, np.ndarray] = field(default_factory=dict)
    post: dict[str, np.ndarray] = field(default_factory=dict)

    def median(self, which: str = "mae") -> dict[str, float]:
        return {name: float(np.median(v)) for name, v in getattr(self, which).items()}


def regime_shift_scenario(seed: int, n: int = 95, q: int = 14, break_at: int | None = 79) -> ScenarioSpec:
    """Loading-flip preset used by the demos and the acceptance sweep.

    Half the predictors are weak indicators (loading 0.5) whose relation
    with the factor reverses at the break; the other half load with 1.0
    and stay put. With equal loadings the flipped and unflipped halves
    cancel in any cross-regime average, which says little about
    regularisation.
    """
    loadings = tuple([0.5] * (q // 2) + [1.0] * (q - q // 2))
    return ScenarioSpec(
        n=n, q=q, factor_loadings=loadings, noise_sd=1.0, idiosyncratic_sd=2.0,
        break_at=break_at, break_kind="loading_flip", seed=seed,
    )


def sweep(scenarios, models, k: int, split_fold: int | None = None, threads: int = 1) -> SweepResult:
    """Run the rolling-origin comparison over many scenarios.

    ``split_fold`` (zero-based) splits every report into folds before it
    and from it on, filling ``SweepResult.pre`` and ``.post``.
    """
    from concurrent.futures import ThreadPoolExecutor

    from .evalharness import make_fold_plan, run_cv

    def one(spec):
        frame = generate(spec)
        return run_cv(frame, models, make_fold_plan(frame.n, k))

    scenarios = list(scenarios)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            reports = list(pool.map(one, scenarios))
    else:
        reports = [one(s) for s in scenarios]

    out = SweepResult()
    for m in models:
        out.mae[m.name] = np.array([r.models[m.name].mae for r in reports], dtype=float)
        if split_fold is not None:
            out.pre[m.name] = np.array([r.window(0, split_fold).models[m.name].mae for r in reports], dtype=float)
            out.post[m.name] = np.array([r.window(split_fold, r.k).models[m.name].mae for r in reports], dtype=float)
    return out


def level_table(spec: ScenarioSpec):
    """Scenario data as level series (``log100`` + differencing inverts it).

    The table starts one quarter before ``spec.start`` so the differenced
    series line up with ``generate(spec)``.
    """
    from .periods import format_quarter, parse_quarter
    from .preprocess import LevelTable

    frame = generate(spec)
    first = format_quarter(parse_quarter(spec.start) - 1)
    periods = quarter_range(first, frame.n + 1)
    columns = {frame.response: to_levels(frame.y)}
    for i, name in enumerate(frame.predictors):
        columns[name] = to_levels(frame.X[:, i])
    return LevelTable(periods=periods, columns=columns)
