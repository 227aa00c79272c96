"""Future device security risk from patch and vulnerability histories.

Per-device patch intervals and CVSS severities are forecast with SMA, AR,
ARIMA and a changepoint trend model, categorized into patch and
vulnerability trends, and combined through a risk matrix.
"""
__version__ = "0.1.0"

from .core import (DeviceCategory, DeviceModel, PatchEvent, PatchIntervalSeries, Point,
                   SeveritySeries, compute_patch_interval, series_median, train_test_split)
from .scoring import (PatchTrend, RiskLevel, TrendAssessment, VulnTrend, assess_device,
                      classify_patch_trend, classify_vulnerability_trend, combine_fdsri)
