"""Cyclic coordinate descent for the unscaled LASSO.

The objective is ``||y - X b||^2 + lam * ||b||_1`` with no ``1/(2m)`` factor.
Its coordinate minimizer is ``soft(x_j' r_j, lam / 2) / (x_j' x_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numba
import numpy as np

ZERO_SNAP = 1e-10
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


class LassoError(ValueError):
    pass


@dataclass(frozen=True)
class DesignMatrix:
    """Predictor matrix of shape (m, p) with one label per column."""

    columns: np.ndarray
    labels: tuple

    def __post_init__(self):
        cols = np.array(self.columns, dtype=np.float64)
        if cols.ndim != 2 or cols.shape[0] < 1:
            raise LassoError("columns must be a 2-D array with at least one row")
        labels = tuple(self.labels)
        if len(labels) != cols.shape[1]:
            raise LassoError(f"{len(labels)} labels for {cols.shape[1]} columns")
        if len(set(labels)) != len(labels):
            raise LassoError("column labels must be unique")
        cols.flags.writeable = False
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_columns(cls, columns: Sequence[np.ndarray], labels: Sequence[Hashable]):
        if len(columns) == 0:
            return cls(np.zeros((0, 0)), ())
        return cls(np.column_stack(columns), tuple(labels))

    @property
    def shape(self):
        return self.columns.shape


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray  # True where the column had zero variance


@dataclass(frozen=True)
class LassoFit:
    beta: np.ndarray
    r2: float
    lam: float
    iterations: int
    converged: bool
    labels: tuple = ()


def standardize_columns(X: DesignMatrix) -> tuple[DesignMatrix, Standardization]:
    cols = X.columns
    if cols.shape[0] < 2:
        raise LassoError("standardization needs at least 2 rows")
    mean = cols.mean(axis=0)
    centered = cols - mean
    std = centered.std(axis=0, ddof=1)
    # relative test so that round-off in a constant column still counts as constant
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    scale = np.where(constant, 1.0, std)
    out = centered / scale
    out[:, constant] = 0.0
    return DesignMatrix(out, X.labels), Standardization(mean, scale, constant)


@numba.njit(cache=True)
def _coordinate_descent(gram, xty, lam, tol, max_iter):
    p = gram.shape[0]
    beta = np.zeros(p)
    grad = xty.copy()  # x_j'(y - X beta)
    half = lam / 2.0
    converged = False
    sweeps = 0
    for sweeps in range(1, max_iter + 1):
        max_step = 0.0
        for j in range(p):
            gjj = gram[j, j]
            if gjj <= 0.0:
                continue
            z = grad[j] + gjj * beta[j]
            if z > half:
                new = (z - half) / gjj
            elif z < -half:
                new = (z + half) / gjj
            else:
                new = 0.0
            step = new - beta[j]
            if step != 0.0:
                for i in range(p):
                    grad[i] -= gram[i, j] * step
                beta[j] = new
                if abs(step) > max_step:
                    max_step = abs(step)
        if max_step < tol:
            converged = True
            break
    return beta, sweeps, converged


def objective(X: DesignMatrix, y, beta, lam: float) -> float:
    resid = np.asarray(y, dtype=np.float64) - X.columns @ beta
    return float(resid @ resid + lam * np.abs(beta).sum())


def r_squared(X: DesignMatrix, y, beta) -> float:
    y = np.asarray(y, dtype=np.float64)
    resid = y - X.columns @ np.asarray(beta, dtype=np.float64)
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    if tss == 0.0:
        return 1.0 if rss == 0.0 else 0.0
    return 1.0 - rss / tss


def lambda_max(X: DesignMatrix, y) -> float:
    """Smallest penalty for which the zero vector is optimal."""
    if X.shape[1] == 0:
        return 0.0
    return float(2.0 * np.max(np.abs(X.columns.T @ np.asarray(y, dtype=np.float64))))


def fit_lasso(
    X: DesignMatrix,
    y,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LassoFit:
    """Minimize ``||y - X b||^2 + lam * ||b||_1`` starting from ``b = 0``.

    Columns are visited in label order on every sweep. Iteration stops when
    the largest coordinate change of a sweep is below ``tol``.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    m, p = X.shape
    if y.size != m:
        raise LassoError(f"target has {y.size} rows, design has {m}")
    if lam < 0 or not np.isfinite(lam):
        raise LassoError(f"penalty must be finite and >= 0, got {lam}")
    if not (np.all(np.isfinite(X.columns)) and np.all(np.isfinite(y))):
        raise LassoError("non-finite values in design or target")
    if p == 0:
        return LassoFit(np.zeros(0), r_squared(X, y, np.zeros(0)), lam, 0, True, ())
    gram = X.columns.T @ X.columns
    xty = X.columns.T @ y
    beta, sweeps, converged = _coordinate_descent(gram, xty, float(lam), float(tol), int(max_iter))
    beta.flags.writeable = False
    return LassoFit(beta, r_squared(X, y, beta), float(lam), int(sweeps), bool(converged), X.labels)


def select(fit: LassoFit, threshold: float) -> dict:
    """Labels with non-zero coefficient mapped to ``|beta|``, if ``r2 > threshold``."""
    if not fit.r2 > threshold:
        return {}
    return {
        label: float(abs(b))
        for label, b in zip(fit.labels, fit.beta)
        if abs(b) > ZERO_SNAP
    }
