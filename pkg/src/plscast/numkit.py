"""Small deterministic statistics and linear-algebra primitives.

Conventions used everywhere in the package:

* ``variance`` and ``covariance`` divide by ``n - 1``.
* ``median`` of an even-length input averages the two central values.
* ``mad`` is the plain median of absolute deviations, without the 1.4826
  normal-consistency factor.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, SingularMatrixError

#: Relative pivot tolerance below which a QR diagonal entry counts as zero.
PIVOT_RTOL = 1e-12


def as_vector(v, name: str = "v") -> np.ndarray:
    """Return ``v`` as a finite 1-D float array (a copy only when needed)."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def as_matrix(X, name: str = "X") -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def mean(v) -> float:
    v = as_vector(v)
    if v.size == 0:
        raise DomainError("mean of an empty vector")
    return float(np.mean(v))


def _pair(a, b):
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.size != b.size:
        raise DomainError(f"length mismatch: {a.size} != {b.size}")
    if a.size < 2:
        raise DomainError("need at least two observations")
    return a, b


def covariance(a, b) -> float:
    """Sample covariance (divisor ``n - 1``)."""
    a, b = _pair(a, b)
    return float(np.dot(a - a.mean(), b - b.mean()) / (a.size - 1))


def variance(v) -> float:
    """Sample variance (divisor ``n - 1``)."""
    v, _ = _pair(v, v)
    d = v - v.mean()
    return float(np.dot(d, d) / (v.size - 1))


def median(v) -> float:
    v = as_vector(v)
    if v.size == 0:
        raise DomainError("median of an empty vector")
    return float(np.median(v))


def mad(v) -> float:
    """Median absolute deviation from the median (no scale constant)."""
    v = as_vector(v)
    if v.size == 0:
        raise DomainError("mad of an empty vector")
    return float(np.median(np.abs(v - np.median(v))))


def least_squares(X, y) -> np.ndarray:
    """Minimise ``||y - X b||`` through a Householder QR factorisation.

    Parameters
    ----------
    X : array_like, shape (n, q)
        Design matrix, used as given (add an intercept column yourself).
    y : array_like, shape (n,)

    Returns
    -------
    ndarray, shape (q,)

    Raises
    ------
    SingularMatrixError
        If a diagonal entry of R is below ``PIVOT_RTOL`` times the largest
        one. The error carries the index of that column.
    """
    X = as_matrix(X)
    y = as_vector(y, "y")
    n, q = X.shape
    if y.size != n:
        raise DomainError(f"X has {n} rows but y has {y.size} entries")
    if n < q:
        raise SingularMatrixError(f"underdetermined system: {n} rows < {q} columns", column=n)
    if q == 0:
        return np.zeros(0)
    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = diag.max()
    bad = np.flatnonzero(diag <= PIVOT_RTOL * scale) if scale > 0 else np.arange(q)
    if bad.size:
        j = int(bad[0])
        raise SingularMatrixError(f"design matrix is rank deficient at column {j}", column=j)
    return _back_substitute(R, Q.T @ y)


def _back_substitute(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    q = R.shape[0]
    x = np.zeros(q)
    for i in range(q - 1, -1, -1):
        x[i] = (b[i] - R[i, i + 1:] @ x[i + 1:]) / R[i, i]
    return x
