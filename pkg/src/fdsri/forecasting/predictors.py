"""Automatically parameterized predictors behind one call signature."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Optional, Sequence

import numpy as np

from .ar import ar_forecast, auto_max_lag, fit_ar
from .arima import (ArimaOrder, arima_forecast, fit_arima, search_pq,
                    select_arima_order)
from .base import DegenerateDates, ForecastResult, ModelTag, NonConvergence, TooShort
from .sma import select_sma_window, sma_forecast
from .trend import TAU_GRID, fit_trend_model

# tie-break order when predictors score equally: simplest adequate model first
PREDICTOR_ORDER = (ModelTag.AR, ModelTag.SMA, ModelTag.ARIMA, ModelTag.TREND)


@dataclass(frozen=True)
class ForecastConfig:
    max_lag: int = 12
    sma_max_window: int = 12
    max_p: int = 12
    max_q: int = 12
    d_max: int = 2
    stepwise: bool = True
    tau_grid: tuple[float, ...] = TAU_GRID
    seasonality: str = "multiplicative-yearly"

    def __post_init__(self):
        if min(self.max_lag, self.max_p, self.max_q, self.d_max) < 0:
            raise ValueError("grid bounds must be >= 0")
        if self.d_max > 12:
            raise ValueError("d_max is capped at 12")


def extrapolate_dates(dates: Sequence[date], horizon: int) -> list[date]:
    """Continue a date sequence with its mean spacing (at least one day)."""
    if len(dates) >= 2:
        gap = max(1.0, (dates[-1] - dates[0]).days / (len(dates) - 1))
    else:
        gap = 1.0
    return [dates[-1] + timedelta(days=round(gap * k)) for k in range(1, horizon + 1)]


def _flat(values: Sequence[float], horizon: int, tag: ModelTag) -> ForecastResult:
    return ForecastResult((float(np.mean(values)),) * horizon, tag)


def forecast_ar(values, horizon, config):
    model = fit_ar(values, auto_max_lag(len(values), config.max_lag))
    return ar_forecast(model, values, horizon)


def forecast_sma(values, horizon, config):
    window = select_sma_window(values, config.sma_max_window)
    return sma_forecast(values, window, horizon)


def forecast_arima(values, horizon, config):
    y = np.asarray(values, dtype=float)
    if len(y) >= 10:
        order = select_arima_order(y, config.max_p, config.max_q, config.d_max, config.stepwise)
    else:
        # too short for ADF: keep the level, search (p, q) only
        order, _ = search_pq(y, 0, config.max_p, config.max_q, config.stepwise)
    try:
        model = fit_arima(y, order)
    except (NonConvergence, TooShort):
        model = fit_arima(y, ArimaOrder(0, order.d, 0))
    return arima_forecast(model, y, horizon)


def forecast_trend(values, dates, horizon, horizon_dates, config):
    try:
        _, fc = fit_trend_model(list(zip(dates, values)), config.tau_grid,
                                horizon_dates, config.seasonality)
    except DegenerateDates:
        return _flat(values, horizon, ModelTag.TREND)
    return fc


def run_predictor(tag: ModelTag | str, values: Sequence[float], horizon: int,
                  dates: Optional[Sequence[date]] = None,
                  horizon_dates: Optional[Sequence[date]] = None,
                  config: ForecastConfig = ForecastConfig()) -> ForecastResult:
    """Fit predictor ``tag`` on ``values`` and forecast ``horizon`` steps.

    SMA, AR and ARIMA index the series by event order. The trend model uses
    ``dates`` and ``horizon_dates``; missing horizon dates are extrapolated
    from the mean spacing of ``dates``. Series shorter than three points get
    a flat forecast of their mean.
    """
    tag = ModelTag(tag)
    values = [float(v) for v in values]
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if len(values) < 3:
        return _flat(values, horizon, tag)
    if tag is ModelTag.AR:
        return forecast_ar(values, horizon, config)
    if tag is ModelTag.SMA:
        return forecast_sma(values, horizon, config)
    if tag is ModelTag.ARIMA:
        return forecast_arima(values, horizon, config)
    if dates is None:
        raise ValueError("the trend model needs dates")
    if horizon_dates is None:
        horizon_dates = extrapolate_dates(dates, horizon)
    return forecast_trend(values, list(dates), horizon, list(horizon_dates), config)
