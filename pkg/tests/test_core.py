from datetime import date, timedelta

import pytest
from hypothesis import given, strategies as st

from fdsri.core import (DeviceCategory, DeviceModel, EmptyInput, NegativeInterval, PatchEvent,
                        PatchIntervalSeries, Point, SeveritySeries, TooFewPoints,
                        VulnerabilityRecord, compute_patch_interval, round_half_up,
                        series_median, train_test_split)

dates = st.dates(min_value=date(1999, 1, 1), max_value=date(2040, 12, 31))


def test_patch_interval_same_day():
    assert compute_patch_interval(date(2020, 5, 1), date(2020, 5, 1)) == 0


def test_patch_interval_151_days():
    assert compute_patch_interval(date(2018, 1, 1), date(2018, 6, 1)) == 151


def test_patch_interval_long_tail():
    # about 16.5 years
    assert compute_patch_interval(date(2003, 1, 1), date(2003, 1, 1) + timedelta(days=6017)) == 6017


def test_patch_interval_negative():
    with pytest.raises(NegativeInterval):
        compute_patch_interval(date(2018, 6, 1), date(2018, 1, 1))


@given(dates, st.integers(0, 3000), st.integers(0, 3000))
def test_patch_interval_additive(a, x, y):
    b, c = a + timedelta(days=x), a + timedelta(days=x + y)
    assert compute_patch_interval(a, b) + compute_patch_interval(b, c) == compute_patch_interval(a, c)


def test_patch_event_fills_interval():
    ev = PatchEvent("CVE-2018-1000", date(2018, 1, 1), date(2018, 6, 1))
    assert ev.interval_days == 151
    with pytest.raises(ValueError):
        PatchEvent("CVE-2018-1000", date(2018, 1, 1), date(2018, 6, 1), 150)


@pytest.mark.parametrize("n, train, test", [(3, 2, 1), (100, 66, 34), (10, 7, 3), (4, 3, 1)])
def test_split_sizes(n, train, test):
    s = train_test_split(list(range(n)))
    assert (len(s.train), len(s.test)) == (train, test)


def test_split_too_short():
    with pytest.raises(TooFewPoints):
        train_test_split([1, 2])


@given(st.lists(st.integers(), min_size=3, max_size=300),
       st.floats(0.05, 0.95, allow_nan=False))
def test_split_roundtrip(xs, ratio):
    s = train_test_split(xs, ratio)
    assert list(s.train) + list(s.test) == xs
    assert len(s.train) >= 2 and len(s.test) >= 1


def test_round_half_up():
    assert round_half_up(6.6) == 7
    assert round_half_up(2.5) == 3
    assert round_half_up(3.95, 1) == 4.0
    assert round_half_up(3.4) == 3


@pytest.mark.parametrize("xs, m", [([5], 5), ([1, 3], 2), ([316, 634, 1170], 634), ([4, 1, 3, 2], 2.5)])
def test_median_examples(xs, m):
    assert series_median(xs) == m


def test_median_empty():
    with pytest.raises(EmptyInput):
        series_median([])


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50), st.randoms())
def test_median_permutation_and_bounds(xs, rnd):
    m = series_median(xs)
    ys = list(xs)
    rnd.shuffle(ys)
    assert series_median(ys) == m
    assert min(xs) <= m <= max(xs)


def test_series_tie_break_by_cve():
    d = date(2019, 1, 1)
    s = SeveritySeries.from_keyed("x", [(d, "CVE-2019-0002", 9.0), (d, "CVE-2019-0001", 1.0),
                                        (date(2018, 1, 1), "CVE-2018-0009", 5.0)])
    assert s.values == [5.0, 1.0, 9.0]


def test_series_invariants():
    with pytest.raises(ValueError):
        PatchIntervalSeries("x", (Point(date(2019, 1, 2), 1), Point(date(2019, 1, 1), 1)))
    with pytest.raises(NegativeInterval):
        PatchIntervalSeries("x", (Point(date(2019, 1, 1), -1),))
    with pytest.raises(ValueError):
        SeveritySeries("x", (Point(date(2019, 1, 1), 10.5),))


def test_vulnerability_record_bounds():
    VulnerabilityRecord("CVE-2020-12345", date(2020, 1, 1), 10.0)
    with pytest.raises(ValueError):
        VulnerabilityRecord("CVE-2020-12345", date(2020, 1, 1), 10.1)
    with pytest.raises(ValueError):
        VulnerabilityRecord("CVE-20-1", date(2020, 1, 1), 5.0)


def test_device_model_roundtrip():
    d = DeviceModel("cam1", "acme", "C100", "CCTV")
    assert d.category is DeviceCategory.CCTV
    assert d.product_key == "acme:C100"
    assert DeviceModel.from_dict(d.to_dict()) == d
    with pytest.raises(ValueError):
        DeviceModel("x", "a", "b", "Toaster")
