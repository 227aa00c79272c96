"""Augmented Dickey-Fuller unit-root test, constant-only regression."""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .base import SingularDesign, TooShort

# MacKinnon (2010), "Critical Values for Cointegration Tests", Queen's
# Economics Department Working Paper 1227, Table 2, N=1, constant, no
# trend: cv(T) = b0 + b1/T + b2/T**2 + b3/T**3.
MACKINNON_CONSTANT = {
    0.01: (-3.43035, -6.5393, -16.786, -79.433),
    0.05: (-2.86154, -2.8903, -4.234, -40.040),
    0.10: (-2.56677, -1.5384, -2.809, 0.0),
}

MIN_LENGTH = 10
MIN_RESID_DOF = 8


class AdfResult(NamedTuple):
    statistic: float
    reject_unit_root: bool
    lags: int
    nobs: int
    critical_value: float


def mackinnon_critical_value(nobs: int, level: float = 0.05) -> float:
    b0, b1, b2, b3 = MACKINNON_CONSTANT[level]
    return b0 + b1 / nobs + b2 / nobs**2 + b3 / nobs**3


def schwert_lags(n: int) -> int:
    lags = int(np.floor(12.0 * (n / 100.0) ** 0.25))
    # regression has n-1-L rows and L+2 columns
    while lags > 0 and (n - 1 - lags) - (lags + 2) < MIN_RESID_DOF:
        lags -= 1
    return lags


def _design(y: np.ndarray, lags: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows for differences dy[start:], columns [1, y_{t-1}, dy_{t-1}..dy_{t-lags}]."""
    dy = np.diff(y)
    m = len(dy)
    cols = [np.ones(m - start), y[start:len(y) - 1]]
    cols += [dy[start - i:m - i] for i in range(1, lags + 1)]
    return np.column_stack(cols), dy[start:]


def _select_lag(y: np.ndarray, max_lags: int) -> int:
    best, best_aic = 0, np.inf
    for lags in range(max_lags + 1):
        X, target = _design(y, lags, max_lags)
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ beta
        sse = max(float(resid @ resid), 1e-300)
        score = len(target) * np.log(sse / len(target)) + 2 * X.shape[1]
        if score < best_aic - 1e-9:
            best, best_aic = lags, score
    return best


def adf_test(series: Sequence[float], level: float = 0.05,
             autolag: bool = True) -> AdfResult:
    """Regress the first difference on a constant, the lagged level and lagged differences.

    The number of lagged differences is at most the Schwert bound; with
    ``autolag`` the AIC picks it on a common sample, otherwise the bound
    itself is used. The statistic is the t-ratio of the lagged level and
    the unit root is rejected when it falls below the MacKinnon critical
    value. A constant series has a singular design and is reported as
    statistic 0, not rejected.
    """
    y = np.asarray(series, dtype=float)
    n = len(y)
    if n < MIN_LENGTH:
        raise TooShort(f"ADF needs at least {MIN_LENGTH} points, got {n}")
    max_lags = schwert_lags(n)
    lags = max_lags
    if autolag and max_lags > 0 and np.ptp(y) > 0:
        lags = _select_lag(y, max_lags)
    X, target = _design(y, lags, lags)
    rows = len(target)
    crit = mackinnon_critical_value(rows, level)
    try:
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise SingularDesign("ADF design is rank deficient")
        beta, *_ = np.linalg.lstsq(X, target, rcond=None)
        resid = target - X @ beta
        sigma2 = float(resid @ resid) / (rows - X.shape[1])
        se = np.sqrt(sigma2 * np.linalg.inv(X.T @ X)[1, 1])
        if not np.isfinite(se) or se <= 0:
            raise SingularDesign("zero standard error")
        stat = float(beta[1] / se)
    except (SingularDesign, np.linalg.LinAlgError):
        return AdfResult(0.0, False, lags, rows, crit)
    return AdfResult(stat, stat < crit, lags, rows, crit)
