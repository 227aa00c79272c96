"""ARIMA(p, d, q) by conditional sum of squares with automated order selection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import lfilter

from .adf import adf_test
from .ar import fit_ar_order
from .base import ForecastResult, ModelTag, NonConvergence, SingularDesign, TooShort, aic

MAX_ITER = 500


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError("ARIMA orders must be non-negative")


@dataclass(frozen=True)
class ArimaModel:
    order: ArimaOrder
    ar: tuple[float, ...]
    ma: tuple[float, ...]
    intercept: float
    css: float
    fit_aic: float


def difference(y: np.ndarray, d: int) -> np.ndarray:
    return np.diff(y, n=d) if d else y


def css_residuals(w: np.ndarray, ar: np.ndarray, ma: np.ndarray, intercept: float) -> np.ndarray:
    """Innovations for t = p..n-1, conditioning on the first p values and zero pre-sample innovations."""
    p = len(ar)
    u = w[p:] - intercept
    for i, phi in enumerate(ar, 1):
        u = u - phi * w[p - i:len(w) - i]
    if len(ma):
        # e_t + sum theta_j e_{t-j} = u_t
        u = lfilter([1.0], np.concatenate(([1.0], ma)), u)
    return u


def _min_length(order: ArimaOrder) -> int:
    return order.p + order.q + 2


def fit_arima(train: Sequence[float], order: ArimaOrder,
              condition_on: int | None = None,
              init: Sequence[float] | None = None) -> ArimaModel:
    """Minimize the conditional sum of squares over AR, MA and (for d = 0) intercept terms.

    Innovations are summed from index ``condition_on`` (default ``p``) of
    the differenced series, which lets competing orders be scored on the
    same rows. The AR part and intercept start from the OLS
    autoregression and the MA part from zero; Levenberg-Marquardt with the
    analytic Jacobian of the innovations refines them. ``init`` overrides
    the starting point, ordered as AR, MA, then intercept.
    """
    w = difference(np.asarray(train, dtype=float), order.d)
    p, q = order.p, order.q
    start = p if condition_on is None else condition_on
    if start < p:
        raise ValueError("cannot condition on fewer than p observations")
    if len(w) < _min_length(order) or len(w) - start < 1:
        raise TooShort(f"{len(w)} points too few for order {order}")
    with_const = order.d == 0
    n_eff = len(w) - start

    if p:
        try:
            ar0 = fit_ar_order(w, p)
            start_ar, start_c = np.array(ar0.coefficients), ar0.intercept
        except SingularDesign:
            start_ar, start_c = np.zeros(p), float(w.mean())
    else:
        start_ar, start_c = np.zeros(0), float(w.mean())
    x0 = np.r_[start_ar, np.zeros(q), [start_c] if with_const else []]
    if init is not None:
        if len(init) != len(x0):
            raise ValueError(f"init needs {len(x0)} values, got {len(init)}")
        x0 = np.asarray(init, dtype=float)

    def unpack(x):
        return x[:p], x[p:p + q], (x[p + q] if with_const else 0.0)

    def residuals(x):
        with np.errstate(all="ignore"):
            e = css_residuals(w, *unpack(x))[start - p:]
        return np.where(np.isfinite(e), e, 1e150)

    def jacobian(x):
        # de/dparam = filter(-regressor) through the MA polynomial
        ar, ma, c = unpack(x)
        m = len(w) - p
        R = np.empty((m, len(x0)))
        with np.errstate(all="ignore"):
            for i in range(1, p + 1):
                R[:, i - 1] = w[p - i:len(w) - i]
            if q:
                e_full = css_residuals(w, ar, ma, c)
                for j in range(1, q + 1):
                    R[:j, p + j - 1] = 0.0
                    R[j:, p + j - 1] = e_full[:m - j]
            if with_const:
                R[:, -1] = 1.0
            J = -lfilter([1.0], np.concatenate(([1.0], ma)), R, axis=0)[start - p:]
        return np.where(np.isfinite(J), J, 0.0)

    if len(x0) == 0:
        x = x0
    else:
        res = least_squares(residuals, x0, jac=jacobian, method="lm",
                            xtol=1e-10, ftol=1e-10, gtol=1e-10, max_nfev=MAX_ITER)
        x = res.x
        if res.status == 0:
            raise NonConvergence(f"order {order} hit the evaluation cap: {res.message}")
    e = residuals(x)
    css = float(e @ e)
    if not np.isfinite(css) or css >= 1e300:
        raise NonConvergence(f"order {order} diverged")
    ar, ma, c = unpack(x)
    return ArimaModel(order, tuple(ar.tolist()), tuple(ma.tolist()), float(c), css,
                      aic(n_eff, css, p + q + 1))


def arima_forecast(model: ArimaModel, train: Sequence[float], horizon: int) -> ForecastResult:
    y = np.asarray(train, dtype=float)
    d = model.order.d
    w = difference(y, d)
    ar, ma = np.asarray(model.ar), np.asarray(model.ma)
    e = list(css_residuals(w, ar, ma, model.intercept))
    e = [0.0] * (len(w) - len(e)) + e
    hist = list(w)
    for _ in range(horizon):
        nxt = model.intercept
        nxt += sum(phi * hist[-i] for i, phi in enumerate(ar, 1))
        nxt += sum(theta * e[-j] for j, theta in enumerate(ma, 1))
        hist.append(nxt)
        e.append(0.0)
    fc = np.asarray(hist[len(w):])
    # integrate back up one differencing level at a time
    for level in range(d - 1, -1, -1):
        fc = difference(y, level)[-1] + np.cumsum(fc)
    return ForecastResult(tuple(fc.tolist()), ModelTag.ARIMA)


def choose_d(y: np.ndarray, d_max: int = 2) -> int:
    """Smallest differencing order whose series rejects a unit root under ADF."""
    for d in range(d_max + 1):
        w = difference(y, d)
        try:
            if adf_test(w).reject_unit_root:
                return d
        except TooShort:
            return d
    return d_max


def common_start(n: int, max_p: int) -> int:
    """Rows held back so every candidate AR order is scored on the same sample."""
    return max(0, min(max_p, (n - 2) // 2))


def _pq_feasible(n: int, start: int, p: int, q: int) -> bool:
    # residual count must exceed the parameter count
    return p <= start and n - start >= p + q + 2


def search_pq(y: np.ndarray, d: int, max_p: int = 12, max_q: int = 12,
              stepwise: bool = True) -> tuple[ArimaOrder, dict]:
    """AIC-minimizing (p, q) for fixed d; returns the order and all scored candidates."""
    n = len(y) - d
    start = common_start(n, max_p)
    scores: dict[tuple[int, int], float] = {}

    def score(p, q):
        if (p, q) in scores:
            return scores[(p, q)]
        val = np.inf
        if 0 <= p <= max_p and 0 <= q <= max_q and _pq_feasible(n, start, p, q):
            try:
                val = fit_arima(y, ArimaOrder(p, d, q), condition_on=start).fit_aic
            except (NonConvergence, TooShort):
                pass
        scores[(p, q)] = val
        return val

    if stepwise:
        for pq in [(0, 0), (1, 0), (0, 1), (1, 1)]:
            score(*pq)
        best = min(scores, key=lambda k: (scores[k], k))
        while True:
            p, q = best
            for dp, dq in [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)]:
                score(p + dp, q + dq)
            new = min(scores, key=lambda k: (scores[k], k))
            if scores[new] >= scores[best] - 1e-9:
                break
            best = new
    else:
        for p in range(max_p + 1):
            for q in range(max_q + 1):
                score(p, q)
        best = min(scores, key=lambda k: (scores[k], k))
    if not np.isfinite(scores[best]):
        best = (0, 0)
    return ArimaOrder(best[0], d, best[1]), scores


def select_arima_order(train: Sequence[float], max_p: int = 12, max_q: int = 12,
                       d_max: int = 2, stepwise: bool = True) -> ArimaOrder:
    """Pick d by repeated ADF tests, then (p, q) by AIC.

    The stepwise search starts from (0,0), (1,0), (0,1), (1,1) and moves
    by one in p and/or q while the AIC improves; ``stepwise=False``
    scores the whole grid.
    """
    y = np.asarray(train, dtype=float)
    if len(y) < 10:
        raise TooShort(f"order selection needs at least 10 points, got {len(y)}")
    d = choose_d(y, d_max)
    order, _ = search_pq(y, d, max_p, max_q, stepwise)
    return order
