"""Autoregressive model with a constant, fitted by OLS; lag order by AIC."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import ForecastResult, ModelTag, SingularDesign, aic, ols


@dataclass(frozen=True)
class ArModel:
    lag_order: int
    coefficients: tuple[float, ...]
    intercept: float
    fit_aic: float

    @property
    def is_intercept_only(self) -> bool:
        return self.lag_order == 0

    def long_run_mean(self) -> float:
        return self.intercept / (1.0 - sum(self.coefficients))


def lag_matrix(y: np.ndarray, p: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows t = start..n-1 of ``[1, y[t-1], ..., y[t-p]]`` and the targets ``y[t]``."""
    n = len(y)
    cols = [np.ones(n - start)] + [y[start - i:n - i] for i in range(1, p + 1)]
    return np.column_stack(cols), y[start:]


def fit_ar_order(train: Sequence[float], p: int, start: int | None = None) -> ArModel:
    y = np.asarray(train, dtype=float)
    start = p if start is None else start
    X, target = lag_matrix(y, p, start)
    beta, sse = ols(X, target)
    return ArModel(p, tuple(beta[1:].tolist()), float(beta[0]), aic(len(target), sse, p + 1))


def intercept_only(train: Sequence[float]) -> ArModel:
    y = np.asarray(train, dtype=float)
    sse = float(((y - y.mean()) ** 2).sum())
    return ArModel(0, (), float(y.mean()), aic(len(y), sse, 1))


def fit_ar(train: Sequence[float], max_lag: int) -> ArModel:
    """Fit AR(p) for p in 0..max_lag and keep the AIC minimizer.

    All candidate orders are compared on the same rows (the first
    ``max_lag`` observations are held back) and the winner is refit on
    every usable row. The intercept-only model (p = 0) competes as well.
    Orders whose design is singular, as for a constant series, are
    skipped.
    """
    y = np.asarray(train, dtype=float)
    if max_lag < 1:
        return intercept_only(y)
    if len(y) < max_lag + 2:
        raise ValueError(f"need at least {max_lag + 2} points for max_lag={max_lag}")
    tail = y[max_lag:]
    best_p, best_aic = 0, aic(len(tail), float(((tail - tail.mean()) ** 2).sum()), 1)
    for p in range(1, max_lag + 1):
        if len(y) - max_lag < p + 2:
            break
        try:
            score = fit_ar_order(y, p, start=max_lag).fit_aic
        except SingularDesign:
            continue
        if score < best_aic - 1e-9:
            best_p, best_aic = p, score
    if best_p == 0:
        return intercept_only(y)
    return fit_ar_order(y, best_p)


def auto_max_lag(n: int, cap: int = 12) -> int:
    # keep at least p + 2 regression rows for every candidate order
    return max(0, min(cap, (n - 2) // 2))


def ar_forecast(model: ArModel, train_tail: Sequence[float], horizon: int) -> ForecastResult:
    p = model.lag_order
    hist = [float(v) for v in train_tail]
    if len(hist) < p:
        raise ValueError(f"need {p} trailing values, got {len(hist)}")
    out = []
    for _ in range(horizon):
        nxt = model.intercept + sum(c * hist[-i] for i, c in enumerate(model.coefficients, 1))
        out.append(nxt)
        hist.append(nxt)
    return ForecastResult(tuple(out), ModelTag.AR)
