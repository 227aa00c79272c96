from __future__ import annotations

from typing import Sequence

from ..core import train_test_split
from .base import ForecastResult, ModelTag, WindowTooLarge
from .metrics import mad


def sma_forecast(train: Sequence[float], window: int, horizon: int) -> ForecastResult:
    """Recursive simple moving average.

    Each step averages the last ``window`` values of the history extended
    by the forecasts already produced.
    """
    if window < 1 or window > len(train):
        raise WindowTooLarge(f"window {window} invalid for {len(train)} points")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    hist = [float(v) for v in train]
    out = []
    for _ in range(horizon):
        nxt = sum(hist[-window:]) / window
        out.append(nxt)
        hist.append(nxt)
    return ForecastResult(tuple(out), ModelTag.SMA)


def select_sma_window(train: Sequence[float], max_window: int = 12) -> int:
    """Window in ``1..min(max_window, len(train) - 1)`` with the lowest validation MAD.

    The last third of ``train`` is held out; ties go to the smaller window.
    """
    n = len(train)
    upper = min(max_window, n - 1)
    if upper <= 1 or n < 3:
        return 1
    split = train_test_split(list(train))
    inner, val = split.train, split.test
    best, best_score = 1, float("inf")
    for w in range(1, min(upper, len(inner)) + 1):
        score = mad(sma_forecast(inner, w, len(val)).values, val)
        if score < best_score - 1e-12:
            best, best_score = w, score
    return best
