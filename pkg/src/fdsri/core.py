"""Domain types, calendar arithmetic and the train/test split."""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_UP, Decimal
from typing import Generic, Sequence, TypeVar

CVE_PATTERN = re.compile(r"^CVE-\d{4}-\d{4,}$")

DEFAULT_SPLIT_RATIO = 0.66


class FdsriError(Exception):
    """Base class for errors raised by this package."""


class NegativeInterval(FdsriError, ValueError):
    pass


class TooFewPoints(FdsriError, ValueError):
    pass


class EmptyInput(FdsriError, ValueError):
    pass


class DeviceCategory(str, enum.Enum):
    CCTV = "CCTV"
    STREAMING = "Streaming"
    SWITCH = "Switch"
    SPEAKER = "Speaker"
    CONTROLLER = "Controller"
    IP2SERIAL = "IP2Serial"
    OTHER = "Other"


@dataclass(frozen=True)
class DeviceModel:
    id: str
    vendor: str
    name: str
    category: DeviceCategory = DeviceCategory.OTHER

    def __post_init__(self):
        object.__setattr__(self, "category", DeviceCategory(self.category))

    @property
    def product_key(self) -> str:
        return f"{self.vendor}:{self.name}"

    def to_dict(self) -> dict:
        return {"id": self.id, "vendor": self.vendor, "name": self.name,
                "category": self.category.value}

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceModel":
        return cls(id=str(d["id"]), vendor=str(d["vendor"]), name=str(d["name"]),
                   category=DeviceCategory(d.get("category", "Other")))


@dataclass(frozen=True)
class VulnerabilityRecord:
    cve_id: str
    published: date
    cvss_v2: float

    def __post_init__(self):
        if not CVE_PATTERN.match(self.cve_id):
            raise ValueError(f"malformed CVE id {self.cve_id!r}")
        if not 0.0 <= self.cvss_v2 <= 10.0:
            raise ValueError(f"cvss_v2 {self.cvss_v2} outside [0, 10]")


def compute_patch_interval(cve_published: date, patch_released: date) -> int:
    """Whole days between a CVE's publication and the release fixing it."""
    days = (patch_released - cve_published).days
    if days < 0:
        raise NegativeInterval(
            f"patch released {patch_released} before CVE published {cve_published}")
    return days


@dataclass(frozen=True)
class PatchEvent:
    cve_id: str
    cve_published: date
    patch_released: date
    interval_days: int = -1

    def __post_init__(self):
        days = compute_patch_interval(self.cve_published, self.patch_released)
        if self.interval_days == -1:
            object.__setattr__(self, "interval_days", days)
        elif self.interval_days != days:
            raise ValueError(f"interval_days {self.interval_days} != {days}")


@dataclass(frozen=True)
class Point:
    date: date
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


T = TypeVar("T")


@dataclass(frozen=True)
class _Series:
    device_id: str
    points: tuple[Point, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        dates = [p.date for p in self.points]
        if any(b < a for a, b in zip(dates, dates[1:])):
            raise ValueError("series points must be sorted by date")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def values(self) -> list[float]:
        return [p.value for p in self.points]

    @property
    def dates(self) -> list[date]:
        return [p.date for p in self.points]

    @classmethod
    def from_keyed(cls, device_id: str, rows: Sequence[tuple[date, str, float]]):
        """Build from ``(date, cve_id, value)`` rows, ordering by date then CVE id."""
        ordered = sorted(rows, key=lambda r: (r[0], r[1]))
        return cls(device_id, tuple(Point(d, v) for d, _, v in ordered))


@dataclass(frozen=True)
class PatchIntervalSeries(_Series):
    def __post_init__(self):
        super().__post_init__()
        if any(p.value < 0 for p in self.points):
            raise NegativeInterval("patch intervals must be non-negative")


@dataclass(frozen=True)
class SeveritySeries(_Series):
    def __post_init__(self):
        super().__post_init__()
        if any(not 0.0 <= p.value <= 10.0 for p in self.points):
            raise ValueError("severities must lie in [0, 10]")


@dataclass(frozen=True)
class EvaluationSplit(Generic[T]):
    train: tuple
    test: tuple
    ratio: float = DEFAULT_SPLIT_RATIO


def round_half_up(x: float, ndigits: int = 0) -> float:
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def train_size(n: int, ratio: float = DEFAULT_SPLIT_RATIO) -> int:
    return max(2, int(round_half_up(ratio * n)))


def train_test_split(series: Sequence[T], ratio: float = DEFAULT_SPLIT_RATIO) -> EvaluationSplit[T]:
    """Split an ordered series into a training prefix and a test suffix.

    The training part holds ``max(2, round(ratio * n))`` points with
    round-half-up rounding; at least one point is left for testing.
    """
    n = len(series)
    if n < 3:
        raise TooFewPoints(f"need at least 3 points to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    k = min(train_size(n, ratio), n - 1)
    items = tuple(series)
    return EvaluationSplit(items[:k], items[k:], ratio)


def series_median(values: Sequence[float]) -> float:
    if len(values) == 0:
        raise EmptyInput("median of an empty sequence")
    s = sorted(values)
    mid = len(s) // 2
    if len(s) % 2:
        return float(s[mid])
    return (s[mid - 1] + s[mid]) / 2.0
