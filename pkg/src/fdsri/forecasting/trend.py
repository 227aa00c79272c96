"""Piecewise-linear trend with L1-penalized slope changes.

The trend is ``k*t + m + sum_j delta_j * max(t - s_j, 0)``, which keeps the
segments continuous. Slope changes ``delta`` carry a penalty of
``(1/tau) * ||delta||_1`` against a Gaussian likelihood whose variance is
profiled out, and are found with an exact active-set lasso solver; base slope
and offset are unpenalized. Time is rescaled to [0, 1] over the training
span and values to unit maximum magnitude before fitting.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from ..core import train_test_split
from .base import DegenerateDates, ForecastResult, ModelTag
from .metrics import mad

TAU_GRID = (0.01, 0.1, 0.5, 1.0, 2.1)
N_CHANGEPOINTS = 25
CHANGEPOINT_RANGE = 0.8
FOURIER_ORDER = 3
SEASONALITY_MIN_SPAN_DAYS = 730
YEAR_DAYS = 365.25


@dataclass(frozen=True)
class ChangepointTrendModel:
    slope: float
    offset: float
    changepoints: tuple[float, ...]
    deltas: tuple[float, ...]
    tau: float
    seasonality: str
    seasonal_coef: tuple[float, ...]
    origin: date
    span_days: float
    y_scale: float

    def _t(self, dates: Sequence[date]) -> np.ndarray:
        return np.array([(d - self.origin).days for d in dates], dtype=float) / self.span_days

    def predict(self, dates: Sequence[date]) -> np.ndarray:
        t = self._t(dates)
        trend = self.slope * t + self.offset
        if self.deltas:
            trend = trend + _hinges(t, np.asarray(self.changepoints)) @ np.asarray(self.deltas)
        if self.seasonal_coef:
            trend = trend * (1.0 + _fourier(dates) @ np.asarray(self.seasonal_coef))
        return trend * self.y_scale

    def slope_at(self, t_scaled: float) -> float:
        """Slope in value units per day at rescaled time ``t_scaled``."""
        active = np.asarray(self.changepoints) < t_scaled
        k = self.slope + float(np.asarray(self.deltas)[active].sum()) if self.deltas else self.slope
        return k * self.y_scale / self.span_days


def _hinges(t: np.ndarray, s: np.ndarray) -> np.ndarray:
    return np.maximum(t[:, None] - s[None, :], 0.0)


def _fourier(dates: Sequence[date]) -> np.ndarray:
    doy = np.array([d.timetuple().tm_yday for d in dates], dtype=float)
    cols = []
    for k in range(1, FOURIER_ORDER + 1):
        arg = 2.0 * np.pi * k * doy / YEAR_DAYS
        cols += [np.sin(arg), np.cos(arg)]
    return np.column_stack(cols)


def _lasso_objective(G: np.ndarray, c: np.ndarray, lam: float, d: np.ndarray) -> float:
    return 0.5 * d @ G @ d - c @ d + lam * np.abs(d).sum()


def _scatter(m: int, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    out = np.zeros(m)
    out[idx] = vals
    return out


def lasso_gram(G: np.ndarray, c: np.ndarray, lam: float, d0: np.ndarray | None = None,
               max_iter: int | None = None) -> np.ndarray:
    """Minimize ``0.5 d'Gd - c'd + lam*||d||_1`` by feature-sign search.

    Active-set method of Lee, Battle, Raina and Ng (NIPS 2006): guess the
    signs of the active coefficients, solve the resulting linear system,
    and line-search over the points where a coefficient crosses zero.
    Exact up to the linear solves; ``G`` should be positive definite.
    """
    m = len(c)
    d = np.zeros(m) if d0 is None else np.array(d0, dtype=float)
    if m == 0:
        return d
    tol = 1e-11 * max(1.0, lam, float(np.abs(c).max()))
    for _ in range(max_iter or 20 * m + 100):
        active = d != 0.0
        theta = np.sign(d)
        grad = G @ d - c
        if np.all(np.abs(grad[active] + lam * theta[active]) <= tol):
            viol = np.where(active, -np.inf, np.abs(grad) - lam)
            i = int(np.argmax(viol))
            if viol[i] <= tol:
                break
            active[i] = True
            theta[i] = -np.sign(grad[i])
        idx = np.flatnonzero(active)
        old = d[idx]
        new = np.linalg.solve(G[np.ix_(idx, idx)], c[idx] - lam * theta[idx])
        best, best_f = new, _lasso_objective(G, c, lam, _scatter(m, idx, new))
        for k in np.flatnonzero((old != 0.0) & (np.sign(new) != np.sign(old))):
            cand = old + old[k] / (old[k] - new[k]) * (new - old)
            cand[k] = 0.0
            f = _lasso_objective(G, c, lam, _scatter(m, idx, cand))
            if f < best_f:
                best, best_f = cand, f
        d = _scatter(m, idx, best)
        d[np.abs(d) < 1e-15] = 0.0
    return d


def lasso_unpenalized(X: np.ndarray, A: np.ndarray, y: np.ndarray, lam: float,
                      d0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Minimize ``0.5*||y - X b - A d||^2 + lam*||d||_1`` with ``b`` free.

    ``b`` is profiled out by projecting onto the orthogonal complement of
    ``X``. Changepoints with no data between them make the Gram matrix
    singular, so a ridge of 1e-9 times its mean diagonal is added.
    """
    Q, _ = np.linalg.qr(X)
    At = A - Q @ (Q.T @ A)
    yt = y - Q @ (Q.T @ y)
    G = At.T @ At
    if len(G):
        G[np.diag_indices_from(G)] += 1e-9 * max(float(np.trace(G)) / len(G), 1e-300)
    d = lasso_gram(G, At.T @ yt, float(lam), d0)
    b, *_ = np.linalg.lstsq(X, y - A @ d, rcond=None)
    return b, d


def penalized_trend(X: np.ndarray, A: np.ndarray, y: np.ndarray, tau: float,
                    max_iter: int = 50, d0: np.ndarray | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
    """MAP fit of a Gaussian likelihood with a Laplace(0, tau) prior on ``d``.

    With the noise variance profiled out, this is a lasso whose weight is
    ``sigma^2 / tau``; ``sigma^2`` is re-estimated from the residuals until
    the weight settles.
    """
    n = len(y)
    floor = 1e-14
    d = np.zeros(A.shape[1]) if d0 is None else np.array(d0, dtype=float)
    b, *_ = np.linalg.lstsq(X, y - A @ d, rcond=None)
    r = y - X @ b - A @ d
    sigma2 = max(float(r @ r) / n, floor)
    for _ in range(max_iter):
        b, d = lasso_unpenalized(X, A, y, sigma2 / tau, d0=d)
        r = y - X @ b - A @ d
        new = max(float(r @ r) / n, floor)
        if abs(new - sigma2) <= 1e-6 * sigma2:
            break
        sigma2 = new
    return b, d


def fit_changepoint_trend(dates: Sequence[date], values: Sequence[float], tau: float,
                          seasonality: str = "multiplicative-yearly",
                          n_changepoints: int = N_CHANGEPOINTS) -> ChangepointTrendModel:
    """Fit the penalized piecewise-linear trend for a single ``tau``.

    With ``seasonality="multiplicative-yearly"`` and a training span over
    two years, the trend is multiplied by ``1 + F(day of year) @ beta``
    (Fourier order 3) and trend and ``beta`` are fitted jointly by
    alternating least squares.
    """
    if len(dates) != len(values):
        raise ValueError("dates and values differ in length")
    if any(b < a for a, b in zip(dates, dates[1:])):
        raise ValueError("dates must be non-decreasing")
    origin = dates[0]
    span = float((dates[-1] - origin).days)
    if span <= 0:
        raise DegenerateDates("training dates span zero days")
    y = np.asarray(values, dtype=float)
    scale = float(np.max(np.abs(y))) or 1.0
    ys = y / scale
    t = np.array([(d - origin).days for d in dates], dtype=float) / span
    # no more changepoints than points in the changepoint range, as Prophet does
    n_cp = max(0, min(n_changepoints, int(np.floor(CHANGEPOINT_RANGE * len(y))) - 1))
    s = np.linspace(0.0, CHANGEPOINT_RANGE, n_cp + 1)[1:]
    X = np.column_stack([np.ones_like(t), t])
    A = _hinges(t, s)

    use_season = seasonality == "multiplicative-yearly" and span > SEASONALITY_MIN_SPAN_DAYS
    b, d = penalized_trend(X, A, ys, tau)
    beta = np.zeros(0)
    if use_season:
        F = _fourier(dates)
        g = np.ones_like(ys)
        for _ in range(20):
            trend = X @ b + A @ d
            # y - trend = trend * F @ beta, small ridge keeps it bounded
            G = trend[:, None] * F
            beta = np.linalg.solve(G.T @ G + 1e-6 * np.eye(F.shape[1]), G.T @ (ys - trend))
            g_new = 1.0 + F @ beta
            b, d = penalized_trend(g_new[:, None] * X, g_new[:, None] * A, ys, tau, d0=d)
            if np.max(np.abs(g_new - g)) < 1e-8:
                break
            g = g_new
    return ChangepointTrendModel(float(b[1]), float(b[0]), tuple(s.tolist()), tuple(d.tolist()),
                                 tau, "multiplicative-yearly" if use_season else "none",
                                 tuple(beta.tolist()), origin, span, scale)


def fit_trend_model(train: Sequence[tuple[date, float]], tau_grid: Sequence[float] = TAU_GRID,
                    horizon_dates: Sequence[date] = (),
                    seasonality: str = "multiplicative-yearly"
                    ) -> tuple[ChangepointTrendModel, ForecastResult]:
    """Choose ``tau`` on an internal validation slice, refit on all of ``train``, forecast.

    The last third of ``train`` (by the usual 66/34 split) is held out;
    each ``tau`` is fitted on the rest and scored by MAD on the held-out
    points. Ties and failed fits resolve to the smaller ``tau``.
    """
    if len(train) < 3:
        raise ValueError("trend model needs at least 3 points")
    dates = [d for d, _ in train]
    values = [v for _, v in train]
    if (dates[-1] - dates[0]).days <= 0:
        raise DegenerateDates("training dates span zero days")
    split = train_test_split(list(train))
    inner, val = split.train, split.test
    best_tau, best_score = min(tau_grid), np.inf
    for tau in sorted(tau_grid):
        try:
            m = fit_changepoint_trend([d for d, _ in inner], [v for _, v in inner], tau, seasonality)
        except DegenerateDates:
            break
        score = mad(m.predict([d for d, _ in val]), [v for _, v in val])
        if score < best_score - 1e-12:
            best_tau, best_score = tau, score
    model = fit_changepoint_trend(dates, values, best_tau, seasonality)
    fc = model.predict(list(horizon_dates)) if len(horizon_dates) else np.zeros(0)
    return model, ForecastResult(tuple(fc.tolist()), ModelTag.TREND)
