from .adf import AdfResult, adf_test, mackinnon_critical_value
from .ar import ArModel, ar_forecast, fit_ar, fit_ar_order
from .arima import (ArimaModel, ArimaOrder, arima_forecast, fit_arima,
                    select_arima_order)
from .base import (DegenerateDates, ForecastResult, LengthMismatch, ModelTag,
                   NonConvergence, SingularDesign, TooShort, WindowTooLarge,
                   clamp_forecast)
from .metrics import ErrorMetrics, error_metrics, mad, rmse
from .predictors import PREDICTOR_ORDER, ForecastConfig, run_predictor
from .sma import select_sma_window, sma_forecast
from .trend import TAU_GRID, ChangepointTrendModel, fit_trend_model
