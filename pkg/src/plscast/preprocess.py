"""Stationarising transforms, Hampel filtering and frame assembly."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import numkit
from .errors import AlignmentError, ConfigError, DomainError, GapError
from .periods import format_quarter, parse_quarter

TRANSFORM_KINDS = ("log100", "level_offset", "percent", "identity")


@dataclass(frozen=True)
class TransformSpec:
    """Per-variable recipe.

    ``log100`` takes ``100 * ln(level)``, ``level_offset`` subtracts
    ``offset`` (100 for sentiment indices, 50 for PMIs), ``percent`` and
    ``identity`` keep the values. ``difference`` then takes the first
    difference.
    """

    kind: str = "identity"
    offset: float = 0.0
    difference: bool = False

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ConfigError(f"unknown transform kind {self.kind!r}; expected one of {TRANSFORM_KINDS}")
        if not math.isfinite(self.offset):
            raise ConfigError("transform offset must be finite")


@dataclass(frozen=True)
class HampelConfig:
    window: int = 19
    n_mad: float = 2.5

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 3 or self.window % 2 == 0:
            raise ConfigError(f"Hampel window must be an odd integer >= 3, got {self.window}")
        if not self.n_mad > 0:
            raise ConfigError(f"Hampel n_mad must be positive, got {self.n_mad}")


@dataclass
class LevelTable:
    """Raw level series on one shared, consecutive quarterly index.

    Missing cells are NaN. Leading and trailing NaNs mark where a series
    starts and stops; NaNs in between are gaps.
    """

    periods: list[str]
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        for name, col in self.columns.items():
            if len(col) != len(self.periods):
                raise AlignmentError(
                    f"series {name!r} has {len(col)} values for {len(self.periods)} periods", series=name
                )


@dataclass
class SeriesFrame:
    """Aligned model-ready data: one response and ``q`` predictors."""

    periods: list[str]
    response: str
    y: np.ndarray
    predictors: list[str] = field(default_factory=list)
    X: np.ndarray | None = None
    outliers: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.X is None:
            self.X = np.zeros((self.y.size, 0))
        self.X = np.asarray(self.X, dtype=float).reshape(self.y.size, -1)
        if len(self.periods) != self.y.size:
            raise AlignmentError("periods and response lengths differ")
        if self.X.shape[1] != len(self.predictors):
            raise AlignmentError("predictor names do not match X columns")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def q(self) -> int:
        return self.X.shape[1]


def apply_transform(levels, spec: TransformSpec, periods=None) -> np.ndarray:
    """Transform a level series according to ``spec``.

    ``periods`` only serves error messages; when given, a non-positive level
    under ``log100`` is reported by its period label.
    """
    v = numkit.as_vector(levels, "levels")
    if spec.kind == "log100":
        bad = np.flatnonzero(v <= 0)
        if bad.size:
            i = int(bad[0])
            where = periods[i] if periods is not None else f"index {i}"
            raise DomainError(f"log100 needs positive levels; got {v[i]!r} at {where}")
        out = 100.0 * np.log(v)
    elif spec.kind == "level_offset":
        out = v - spec.offset
    else:
        out = v.copy()
    if spec.difference:
        if v.size < 2:
            raise DomainError("differencing needs at least two observations")
        out = np.diff(out)
    return out


def hampel_filter(v, cfg: HampelConfig = HampelConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Clamp points outside ``median +/- n_mad * MAD`` of their centred window.

    Windows are truncated at the ends of the series. Statistics always come
    from the unfiltered input. A flagged point is moved to the nearest band
    edge, so with a zero MAD it lands exactly on the window median.

    Returns
    -------
    filtered : ndarray
        Copy of ``v`` with the outliers clamped.
    flags : ndarray of bool
        True where a value was changed.
    """
    x = numkit.as_vector(v)
    out = x.copy()
    flags = np.zeros(x.size, dtype=bool)
    if x.size < 3:
        return out, flags
    half = cfg.window // 2
    for t in range(x.size):
        w = x[max(0, t - half): t + half + 1]
        m = np.median(w)
        band = math.inf if math.isinf(cfg.n_mad) else cfg.n_mad * np.median(np.abs(w - m))
        dev = x[t] - m
        if abs(dev) > band:
            out[t] = m + math.copysign(band, dev)
            flags[t] = True
    return out, flags


def _span(name: str, col: np.ndarray, periods: list[str]) -> tuple[int, int]:
    ok = np.flatnonzero(~np.isnan(col))
    if ok.size == 0:
        raise GapError(f"series {name!r} has no observations", series=name)
    lo, hi = int(ok[0]), int(ok[-1])
    holes = np.flatnonzero(np.isnan(col[lo:hi + 1]))
    if holes.size:
        p = periods[lo + int(holes[0])]
        raise GapError(f"series {name!r} is missing a value at {p}", series=name, period=p)
    return lo, hi


def build_frame(
    raw: LevelTable,
    specs: Mapping[str, TransformSpec],
    response: str,
    cfg: HampelConfig | None = HampelConfig(),
) -> SeriesFrame:
    """Transform, filter and align the series named in ``specs``.

    The frame covers exactly the transformed response's periods. Every
    predictor must cover that whole span after its own transform (a series
    that is not differenced may start one quarter earlier and is trimmed).
    ``cfg=None`` skips the Hampel filter.
    """
    if response not in specs:
        raise ConfigError(f"response {response!r} has no transform spec")
    missing = [name for name in specs if name not in raw.columns]
    if missing:
        raise ConfigError(f"series not found in data: {', '.join(missing)}")

    ordinals = [parse_quarter(p) for p in raw.periods]
    transformed: dict[str, tuple[int, np.ndarray]] = {}
    for name, spec in specs.items():
        col = np.asarray(raw.columns[name], dtype=float)
        lo, hi = _span(name, col, raw.periods)
        values = apply_transform(col[lo:hi + 1], spec, raw.periods[lo:hi + 1])
        start = ordinals[lo] + (1 if spec.difference else 0)
        transformed[name] = (start, values)

    r_start, r_vals = transformed[response]
    r_end = r_start + r_vals.size - 1
    predictors = [name for name in specs if name != response]
    cols = []
    for name in predictors:
        start, values = transformed[name]
        end = start + values.size - 1
        if start > r_start or end < r_end:
            raise AlignmentError(
                f"series {name!r} covers {format_quarter(start)}-{format_quarter(end)} but the response "
                f"needs {format_quarter(r_start)}-{format_quarter(r_end)}",
                series=name,
            )
        cols.append(values[r_start - start: r_start - start + r_vals.size])

    periods = [format_quarter(r_start + i) for i in range(r_vals.size)]
    outliers: dict[str, list[str]] = {}

    def _filter(name, values):
        if cfg is None:
            return values
        filtered, flags = hampel_filter(values, cfg)
        outliers[name] = [periods[i] for i in np.flatnonzero(flags)]
        return filtered

    y = _filter(response, r_vals)
    cols = [_filter(name, c) for name, c in zip(predictors, cols)]
    X = np.column_stack(cols) if cols else np.zeros((y.size, 0))
    return SeriesFrame(periods=periods, response=response, y=y, predictors=predictors, X=X, outliers=outliers)
