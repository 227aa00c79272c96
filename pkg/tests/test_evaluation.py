from datetime import date, timedelta

import numpy as np
import pytest

import fdsri.evaluation as ev
from fdsri.core import DeviceModel, PatchIntervalSeries, Point, SeveritySeries
from fdsri.evaluation import (BEST, DeviceEvaluation, EmptyCorpus, InsufficientData,
                              PredictorEvaluation, TrendOutcome, aggregate_corpus,
                              evaluate_device, evaluate_workspace, forecast_horizon,
                              predict_future, report_json, report_rows, select_best_predictor)
from fdsri.forecasting import PREDICTOR_ORDER, ErrorMetrics, ForecastResult, ModelTag
from fdsri.ingestion import DatasetWorkspace
from fdsri.scoring import PatchTrend, RiskLevel, VulnTrend
from fdsri.synthetic import corpus_workspace, generate_corpus

from conftest import daily


def make(cls, values, step=30, device="dev"):
    return cls(device, tuple(Point(d, v) for d, v in zip(daily(len(values), step=step), values)))


def outcome(pred, obs, rmse=None):
    return TrendOutcome(pred, obs, None if rmse is None else ErrorMetrics(rmse, rmse / 2))


def device_eval(device_id, category="CCTV", pt=("Fast", "Fast"), vt=("Low", "Low"), rmse=1.0):
    r = PredictorEvaluation(outcome(*pt, rmse=rmse), outcome(*vt, rmse=rmse))
    return DeviceEvaluation(device_id, category, {"AR": r, BEST: r}, best_tags={"pt": "AR", "vt": "AR"})


# --- evaluate_device -------------------------------------------------------

def test_single_points_skip_both_trends():
    e = evaluate_device(make(PatchIntervalSeries, [40]), make(SeveritySeries, [9.0]))
    assert e.pt_skip and e.vt_skip
    for r in e.results.values():
        assert (r.pt.predicted, r.vt.predicted) == ("Slow", "Low")
        assert r.predicted_fdsri is RiskLevel.MEDIUM and r.correct_fdsri
        assert r.pt.metrics is None and r.vt.metrics is None


def test_constant_device_all_correct():
    e = evaluate_device(make(PatchIntervalSeries, [100.0] * 12), make(SeveritySeries, [8.0] * 12))
    assert set(e.results) == {t.value for t in PREDICTOR_ORDER} | {BEST}
    for r in e.results.values():
        assert (r.pt.predicted, r.vt.predicted, r.predicted_fdsri) == ("Medium", "High", RiskLevel.HIGH)
        assert r.pt.correct and r.vt.correct and r.correct_fdsri
        assert r.pt.metrics.rmse == pytest.approx(0, abs=1e-6)


def test_horizon_equals_test_length(monkeypatch):
    seen = []
    real = ev.run_predictor

    def spy(tag, values, horizon, *a, **k):
        seen.append((len(values), horizon))
        return real(tag, values, horizon, *a, **k)

    monkeypatch.setattr(ev, "run_predictor", spy)
    evaluate_device(make(PatchIntervalSeries, list(range(10, 110, 10))),
                    make(SeveritySeries, [5.0] * 10), [ModelTag.SMA])
    # outer split 7/3, inner validation split of the 7 training points is 5/2
    assert (7, 3) in seen and (5, 2) in seen
    assert all(n + h in (10, 7) for n, h in seen)


def test_skip_consistency_and_metrics_presence():
    e = evaluate_device(make(PatchIntervalSeries, [1, 2]), make(SeveritySeries, [5.0, 6.0, 7.0, 6.0]))
    assert e.pt_skip and e.vt_skip is None
    for tag in ("AR", "SMA", "ARIMA", "TREND"):
        assert e.results[tag].pt.metrics is None
        assert e.results[tag].vt.metrics is not None


def test_perfect_forecasts_agree_with_observed(monkeypatch):
    """An oracle predictor that returns the test values reproduces the observed categories."""
    values = [5, 30, 700, 12, 400, 900, 15, 20, 1000, 2]
    split = ev.train_test_split(values)

    def oracle(tag, train, horizon, *a, **k):
        full = values if len(train) == len(split.train) else list(split.train)
        return ForecastResult(full[len(train):len(train) + horizon], tag)

    monkeypatch.setattr(ev, "run_predictor", oracle)
    e = evaluate_device(make(PatchIntervalSeries, values), make(SeveritySeries, [1.0] * 10))
    for r in e.results.values():
        assert r.pt.predicted == r.pt.observed


def test_to_dict_roundtrips_through_json():
    import json
    e = evaluate_device(make(PatchIntervalSeries, [10, 20, 30, 40]), make(SeveritySeries, [1, 2]))
    d = json.loads(json.dumps(e.to_dict()))
    assert d["results"]["AR"]["pt"]["predicted"] in {"Fast", "Medium", "Slow"}


# --- select_best_predictor -------------------------------------------------

def test_best_constant_tie_goes_to_ar():
    assert select_best_predictor([50.0] * 12, daily(12), PREDICTOR_ORDER) is ModelTag.AR


def test_best_respects_predictor_set():
    assert select_best_predictor([50.0] * 12, daily(12), [ModelTag.TREND, ModelTag.SMA]) is ModelTag.SMA


def test_best_insufficient():
    with pytest.raises(InsufficientData):
        select_best_predictor([1, 2], daily(2), PREDICTOR_ORDER)


@pytest.fixture(scope="module")
def ar1_selections():
    from collections import Counter
    from test_forecasting import simulate_ar
    return Counter(select_best_predictor(list(simulate_ar([0.6], 60, seed, c=20.0)), daily(60),
                                         PREDICTOR_ORDER) for seed in range(10))


def test_best_on_ar1_data_plurality(ar1_selections):
    assert ar1_selections.most_common(1)[0][0] is ModelTag.AR


@pytest.mark.xfail(strict=True, reason="MAD cannot separate near-flat multi-step forecasts "
                                       "of a mean-reverting series; measured 5-7 of 10")
def test_best_on_ar1_data_rate(ar1_selections):
    assert ar1_selections[ModelTag.AR] >= 8


def test_best_on_two_regime_data():
    wins = 0
    for seed in range(10):
        t = np.arange(60.0)
        y = np.where(t < 25, 100 + 10 * t, 350.0) + np.random.default_rng(seed).normal(0, 5, 60)
        tag = select_best_predictor(list(y), daily(60), [ModelTag.AR, ModelTag.SMA, ModelTag.TREND])
        wins += tag in (ModelTag.TREND, ModelTag.SMA)
    assert wins >= 7


# --- aggregation -----------------------------------------------------------

def test_aggregate_single_correct():
    r = aggregate_corpus([device_eval("a")])
    assert r["accuracy"]["AR"]["fdsri"]["accuracy_all"] == 100.0
    assert r["best"]["accuracy"]["fdsri"]["accuracy_all"] == 100.0


def test_aggregate_half_correct():
    r = aggregate_corpus([device_eval("a"), device_eval("b", pt=("Slow", "Fast"))])
    acc = r["accuracy"]["AR"]
    assert acc["fdsri"]["accuracy_all"] == 50.0
    assert acc["pt"]["too_high"] == 1 and acc["pt"]["too_low"] == 0


def test_aggregate_median_rmse():
    evals = [device_eval(str(i), rmse=x) for i, x in enumerate([10, 53.17, 400])]
    assert aggregate_corpus(evals)["errors"]["AR"]["pt"]["rmse_median"] == 53.17


def test_aggregate_empty():
    with pytest.raises(EmptyCorpus):
        aggregate_corpus([])


def test_aggregate_decomposition():
    evals = [device_eval("a", "CCTV"), device_eval("b", "Switch", vt=("High", "Low")),
             device_eval("c", "Switch"), device_eval("d", "Speaker", pt=("Fast", "Medium"))]
    r = aggregate_corpus(evals)
    for kind in ("pt", "vt", "fdsri"):
        total = r["accuracy"]["AR"][kind]["correct"]
        assert total == sum(c[kind]["correct"] for c in r["by_category"]["AR"].values())
    assert sum(r["device_counts"].values()) == 4
    assert r["device_counts"] == {"CCTV": 1, "Speaker": 1, "Switch": 2}


def test_aggregate_skipped_devices_excluded_from_errors():
    skipped = DeviceEvaluation("z", "CCTV", {k: PredictorEvaluation(outcome("Slow", "Slow"),
                                                                     outcome("Low", "Low"))
                                             for k in ("AR", BEST)}, "few", "few", {})
    r = aggregate_corpus([device_eval("a", rmse=7.0), skipped])
    assert r["errors"]["AR"]["pt"] == {"devices": 1, "rmse_median": 7.0, "mad_median": 3.5}
    fd = r["accuracy"]["AR"]["fdsri"]
    assert (fd["devices"], fd["evaluable"], fd["accuracy_all"], fd["accuracy_evaluable"]) == (2, 1, 100.0, 100.0)


def test_report_rows_shape():
    rows = report_rows(aggregate_corpus([device_eval("a")]))
    assert ("pt_errors", "AR", "rmse_median", 1.0) in rows
    assert all(len(r) == 4 for r in rows)


# --- production path -------------------------------------------------------

def test_forecast_horizon():
    assert forecast_horizon(10) == 3
    assert forecast_horizon(1) == 1
    assert forecast_horizon(100) == 34


def test_predict_future_rich_history():
    a = predict_future(make(PatchIntervalSeries, [5, 8, 12, 7, 9, 11, 6, 10, 8, 7]),
                       make(SeveritySeries, [7.5, 9.0, 8.1, 7.2, 9.8, 8.8]))
    assert len(a.pt_forecast) == 3 and len(a.vt_forecast) == 2
    assert all(0 <= v <= 10 for v in a.vt_forecast.values)
    assert (a.pt, a.vt, a.fdsri) == (PatchTrend.FAST, VulnTrend.HIGH, RiskLevel.MEDIUM)


def test_predict_future_no_data():
    a = predict_future(make(PatchIntervalSeries, []), make(SeveritySeries, []))
    assert (a.pt, a.vt, a.fdsri) == (PatchTrend.SLOW, VulnTrend.LOW, RiskLevel.MEDIUM)
    assert a.pt_forecast is None and a.vt_forecast is None


def test_predict_future_two_points_mean():
    a = predict_future(make(PatchIntervalSeries, [10, 30]), make(SeveritySeries, []))
    assert a.pt_forecast.values == (20.0,)


# --- workspace -------------------------------------------------------------

@pytest.fixture(scope="module")
def small_workspace():
    return corpus_workspace(generate_corpus(n_devices=9, seed=3))


def test_workspace_parallel_matches_serial(small_workspace):
    serial = report_json(aggregate_corpus(evaluate_workspace(small_workspace, jobs=1)))
    parallel = report_json(aggregate_corpus(evaluate_workspace(small_workspace, jobs=2)))
    assert serial == parallel


def test_workspace_order_is_by_device_id():
    ws = DatasetWorkspace()
    for name in ("b", "a", "c"):
        ws.add(DeviceModel(name, "v", name), make(PatchIntervalSeries, [], device=name),
               make(SeveritySeries, [], device=name))
    assert [e.device_id for e in evaluate_workspace(ws)] == ["a", "b", "c"]
