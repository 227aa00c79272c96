"""Patch/vulnerability trend categories and the future risk matrix."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .core import FdsriError, PatchIntervalSeries, SeveritySeries, round_half_up, series_median
from .forecasting.base import ForecastResult

FAST_MAX_DAYS = 22
MEDIUM_MAX_DAYS = 413
LOW_MAX_CVSS = 3.9
MEDIUM_MAX_CVSS = 6.9
MIN_TREND_POINTS = 2


class OutOfRange(FdsriError, ValueError):
    pass


class _Ordered(str, enum.Enum):
    @property
    def rank(self) -> int:
        return list(type(self)).index(self)


class PatchTrend(_Ordered):
    """Ordered by patch interval length."""
    FAST = "Fast"
    MEDIUM = "Medium"
    SLOW = "Slow"


class VulnTrend(_Ordered):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


class RiskLevel(_Ordered):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"


RISK_MATRIX: dict[tuple[VulnTrend, PatchTrend], RiskLevel] = {
    (VulnTrend.LOW, PatchTrend.FAST): RiskLevel.LOW,
    (VulnTrend.LOW, PatchTrend.MEDIUM): RiskLevel.LOW,
    (VulnTrend.LOW, PatchTrend.SLOW): RiskLevel.MEDIUM,
    (VulnTrend.MEDIUM, PatchTrend.FAST): RiskLevel.LOW,
    (VulnTrend.MEDIUM, PatchTrend.MEDIUM): RiskLevel.MEDIUM,
    (VulnTrend.MEDIUM, PatchTrend.SLOW): RiskLevel.HIGH,
    (VulnTrend.HIGH, PatchTrend.FAST): RiskLevel.MEDIUM,
    (VulnTrend.HIGH, PatchTrend.MEDIUM): RiskLevel.HIGH,
    (VulnTrend.HIGH, PatchTrend.SLOW): RiskLevel.CRITICAL,
}


def classify_patch_trend(intervals: Sequence[float]) -> tuple[PatchTrend, Optional[float]]:
    """Category of the median patch interval in days.

    Fewer than two intervals means no trend can be formed and the vendor
    is treated as slow; the basis is then ``None``.
    """
    if len(intervals) < MIN_TREND_POINTS:
        return PatchTrend.SLOW, None
    basis = series_median(intervals)
    if basis <= FAST_MAX_DAYS:
        return PatchTrend.FAST, basis
    if basis <= MEDIUM_MAX_DAYS:
        return PatchTrend.MEDIUM, basis
    return PatchTrend.SLOW, basis


def classify_vulnerability_trend(severities: Sequence[float]) -> tuple[VulnTrend, Optional[float]]:
    """Category of the median CVSS score, rounded to one decimal before banding.

    Fewer than two severities falls back to a low trend with basis ``None``.
    """
    for s in severities:
        if not 0.0 <= s <= 10.0:
            raise OutOfRange(f"CVSS {s} outside [0, 10]")
    if len(severities) < MIN_TREND_POINTS:
        return VulnTrend.LOW, None
    basis = round_half_up(series_median(severities), 1)
    if basis <= LOW_MAX_CVSS:
        return VulnTrend.LOW, basis
    if basis <= MEDIUM_MAX_CVSS:
        return VulnTrend.MEDIUM, basis
    return VulnTrend.HIGH, basis


def combine_fdsri(vt: VulnTrend, pt: PatchTrend) -> RiskLevel:
    return RISK_MATRIX[(VulnTrend(vt), PatchTrend(pt))]


@dataclass(frozen=True)
class TrendAssessment:
    device_id: str
    pt: PatchTrend
    vt: VulnTrend
    fdsri: RiskLevel
    pt_basis: Optional[float]
    vt_basis: Optional[float]
    pt_fallback: bool
    vt_fallback: bool
    pt_forecast: Optional[ForecastResult] = None
    vt_forecast: Optional[ForecastResult] = None

    def to_dict(self) -> dict:
        return {
            "device_id": self.device_id, "pt": self.pt.value, "vt": self.vt.value,
            "fdsri": self.fdsri.value, "pt_basis": self.pt_basis, "vt_basis": self.vt_basis,
            "pt_fallback": self.pt_fallback, "vt_fallback": self.vt_fallback,
            "pt_forecast": list(self.pt_forecast.values) if self.pt_forecast else None,
            "vt_forecast": list(self.vt_forecast.values) if self.vt_forecast else None,
        }


def assess_device(patch_series: PatchIntervalSeries, sev_series: SeveritySeries,
                  pt_forecast: Optional[ForecastResult] = None,
                  vt_forecast: Optional[ForecastResult] = None) -> TrendAssessment:
    """Classify observed values joined with their (already clamped) forecasts."""
    intervals = patch_series.values + (list(pt_forecast.values) if pt_forecast else [])
    severities = sev_series.values + (list(vt_forecast.values) if vt_forecast else [])
    pt, pt_basis = classify_patch_trend(intervals)
    vt, vt_basis = classify_vulnerability_trend(severities)
    return TrendAssessment(patch_series.device_id, pt, vt, combine_fdsri(vt, pt),
                           pt_basis, vt_basis, pt_basis is None, vt_basis is None,
                           pt_forecast, vt_forecast)
