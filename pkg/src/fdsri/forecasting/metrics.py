"""Forecast error metrics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import LengthMismatch


@dataclass(frozen=True)
class ErrorMetrics:
    rmse: float
    mad: float


def _residuals(forecast: Sequence[float], observed: Sequence[float]) -> np.ndarray:
    f = np.asarray(forecast, dtype=float)
    o = np.asarray(observed, dtype=float)
    if f.shape != o.shape or f.size == 0:
        raise LengthMismatch(f"forecast has {f.size} values, observed {o.size}")
    return f - o


def rmse(forecast: Sequence[float], observed: Sequence[float]) -> float:
    e = _residuals(forecast, observed)
    return float(np.sqrt(np.mean(e * e)))


def mad(forecast: Sequence[float], observed: Sequence[float]) -> float:
    """Median absolute deviation of the residuals from their own median.

    A constant bias cancels out, so a forecast shifted by a fixed offset
    scores zero here while its RMSE does not.
    """
    e = _residuals(forecast, observed)
    return float(np.median(np.abs(e - np.median(e))))


def error_metrics(forecast: Sequence[float], observed: Sequence[float]) -> ErrorMetrics:
    return ErrorMetrics(rmse(forecast, observed), mad(forecast, observed))
