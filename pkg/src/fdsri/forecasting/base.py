from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..core import FdsriError


class ModelTag(str, enum.Enum):
    SMA = "SMA"
    AR = "AR"
    ARIMA = "ARIMA"
    TREND = "TREND"


class WindowTooLarge(FdsriError, ValueError):
    pass


class SingularDesign(FdsriError, np.linalg.LinAlgError):
    pass


class TooShort(FdsriError, ValueError):
    pass


class NonConvergence(FdsriError, RuntimeError):
    pass


class DegenerateDates(FdsriError, ValueError):
    pass


class LengthMismatch(FdsriError, ValueError):
    pass


@dataclass(frozen=True)
class ForecastResult:
    values: tuple[float, ...]
    model_tag: ModelTag
    clamped_floor: bool = False
    clamped_ceiling: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "model_tag", ModelTag(self.model_tag))

    def __len__(self) -> int:
        return len(self.values)


def clamp_forecast(result: ForecastResult, floor: float,
                   ceiling: Optional[float] = None) -> ForecastResult:
    """Clip forecast values into ``[floor, ceiling]``, flagging any clipping."""
    if ceiling is not None and floor > ceiling:
        raise ValueError("floor must not exceed ceiling")
    v = np.asarray(result.values, dtype=float)
    low = v < floor
    high = v > ceiling if ceiling is not None else np.zeros_like(low)
    clipped = np.clip(v, floor, ceiling if ceiling is not None else np.inf)
    return replace(result, values=tuple(clipped.tolist()),
                   clamped_floor=result.clamped_floor or bool(low.any()),
                   clamped_ceiling=result.clamped_ceiling or bool(high.any()))


def ols(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares with a rank check; returns (coefficients, SSE)."""
    if X.shape[0] < X.shape[1] or np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularDesign("design matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    return beta, float(resid @ resid)


def aic(n: int, sse: float, k: int) -> float:
    # SSE of an exact fit would send log to -inf and win every comparison
    sse = max(sse, 1e-12 * n)
    return n * np.log(sse / n) + 2 * k
