"""Train/test evaluation of every predictor per device, and corpus aggregation."""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .core import (DeviceCategory, FdsriError, PatchIntervalSeries, SeveritySeries,
                   round_half_up, series_median, train_test_split)
from .forecasting.base import ForecastResult, ModelTag, clamp_forecast
from .forecasting.metrics import ErrorMetrics, error_metrics, mad
from .forecasting.predictors import PREDICTOR_ORDER, ForecastConfig, run_predictor
from .ingestion import DatasetWorkspace
from .scoring import (PatchTrend, RiskLevel, TrendAssessment, VulnTrend, assess_device,
                      classify_patch_trend, classify_vulnerability_trend, combine_fdsri)

MIN_SPLIT_POINTS = 3
FORECAST_SHARE = 0.34
BEST = "BEST"


class InsufficientData(FdsriError, ValueError):
    pass


class EmptyCorpus(FdsriError, ValueError):
    pass


def _clamp(kind: str, fc: ForecastResult) -> ForecastResult:
    return clamp_forecast(fc, 0.0, 10.0 if kind == "vt" else None)


def _classify(kind: str, values: Sequence[float]):
    if kind == "pt":
        return classify_patch_trend(values)[0]
    return classify_vulnerability_trend(values)[0]


def _ordered(tags: Iterable) -> list[ModelTag]:
    wanted = {ModelTag(t) for t in tags}
    return [t for t in PREDICTOR_ORDER if t in wanted]


def select_best_predictor(values: Sequence[float], dates: Sequence, predictor_set: Iterable,
                          kind: str = "pt", config: ForecastConfig = ForecastConfig(),
                          ratio: float = 0.66) -> ModelTag:
    """Predictor with the lowest MAD on the last third of ``values``.

    Each predictor is fitted on the first 66% and forecasts the rest.
    Equal scores resolve in the order AR, SMA, ARIMA, TREND.
    """
    if len(values) < MIN_SPLIT_POINTS:
        raise InsufficientData(f"need {MIN_SPLIT_POINTS} points, got {len(values)}")
    tags = _ordered(predictor_set)
    if not tags:
        raise ValueError("empty predictor set")
    split = train_test_split(list(zip(dates, values)), ratio)
    inner_d = [d for d, _ in split.train]
    inner_v = [v for _, v in split.train]
    val_d = [d for d, _ in split.test]
    val_v = [v for _, v in split.test]
    best, best_score = tags[0], float("inf")
    for tag in tags:
        fc = _clamp(kind, run_predictor(tag, inner_v, len(val_v), inner_d, val_d, config))
        score = mad(fc.values, val_v)
        if score < best_score - 1e-12:
            best, best_score = tag, score
    return best


@dataclass(frozen=True)
class TrendOutcome:
    predicted: str
    observed: str
    metrics: Optional[ErrorMetrics] = None

    @property
    def correct(self) -> bool:
        return self.predicted == self.observed


@dataclass(frozen=True)
class PredictorEvaluation:
    pt: TrendOutcome
    vt: TrendOutcome

    @property
    def predicted_fdsri(self) -> RiskLevel:
        return combine_fdsri(VulnTrend(self.vt.predicted), PatchTrend(self.pt.predicted))

    @property
    def observed_fdsri(self) -> RiskLevel:
        return combine_fdsri(VulnTrend(self.vt.observed), PatchTrend(self.pt.observed))

    @property
    def correct_fdsri(self) -> bool:
        return self.predicted_fdsri == self.observed_fdsri


@dataclass
class DeviceEvaluation:
    device_id: str
    category: str
    results: dict[str, PredictorEvaluation]
    pt_skip: Optional[str] = None
    vt_skip: Optional[str] = None
    best_tags: dict[str, Optional[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"device_id": self.device_id, "category": self.category,
               "pt_skip": self.pt_skip, "vt_skip": self.vt_skip,
               "best_tags": dict(self.best_tags), "results": {}}
        for tag, r in self.results.items():
            out["results"][tag] = {
                "pt": asdict(r.pt), "vt": asdict(r.vt),
                "predicted_fdsri": r.predicted_fdsri.value,
                "observed_fdsri": r.observed_fdsri.value,
            }
        return out


def _evaluate_trend(kind: str, dates: list, values: list[float], tags: list[ModelTag],
                    ratio: float, config: ForecastConfig):
    observed = _classify(kind, values).value
    if len(values) < MIN_SPLIT_POINTS:
        skip = f"insufficient data: {len(values)} points"
        same = TrendOutcome(observed, observed)
        return {t.value: same for t in tags} | {BEST: same}, skip, None
    split = train_test_split(list(zip(dates, values)), ratio)
    tr_d = [d for d, _ in split.train]
    tr_v = [v for _, v in split.train]
    te_d = [d for d, _ in split.test]
    te_v = [v for _, v in split.test]
    outcomes = {}
    for tag in tags:
        fc = _clamp(kind, run_predictor(tag, tr_v, len(te_v), tr_d, te_d, config))
        predicted = _classify(kind, tr_v + list(fc.values)).value
        outcomes[tag.value] = TrendOutcome(predicted, observed, error_metrics(fc.values, te_v))
    if len(tr_v) >= MIN_SPLIT_POINTS:
        best = select_best_predictor(tr_v, tr_d, tags, kind, config, ratio)
    else:
        best = tags[0]
    outcomes[BEST] = outcomes[best.value]
    return outcomes, None, best.value


def evaluate_device(patch_series: PatchIntervalSeries, sev_series: SeveritySeries,
                    predictor_set: Iterable = PREDICTOR_ORDER, split_ratio: float = 0.66,
                    config: ForecastConfig = ForecastConfig(),
                    category: str = DeviceCategory.OTHER.value) -> DeviceEvaluation:
    """Fit every predictor on the training prefix of each trend and score it on the test suffix.

    The forecast horizon equals the test length. The predicted category
    comes from training values plus the clamped forecast, the observed
    one from the full series. Trends with fewer than three points are
    skipped and their category is taken from the observations alone.
    Results are keyed by predictor tag plus ``"BEST"``, the predictor
    chosen on the training prefix alone.
    """
    tags = _ordered(predictor_set)
    pt, pt_skip, pt_best = _evaluate_trend("pt", patch_series.dates, patch_series.values,
                                           tags, split_ratio, config)
    vt, vt_skip, vt_best = _evaluate_trend("vt", sev_series.dates, sev_series.values,
                                           tags, split_ratio, config)
    results = {k: PredictorEvaluation(pt[k], vt[k]) for k in [t.value for t in tags] + [BEST]}
    return DeviceEvaluation(patch_series.device_id, DeviceCategory(category).value, results,
                            pt_skip, vt_skip, {"pt": pt_best, "vt": vt_best})


def forecast_horizon(n: int) -> int:
    return max(1, int(round_half_up(FORECAST_SHARE * n)))


def _future(kind: str, dates: list, values: list[float], tags, config) -> Optional[ForecastResult]:
    n = len(values)
    if n < 2:
        return None
    horizon = forecast_horizon(n)
    if n < MIN_SPLIT_POINTS:
        return _clamp(kind, run_predictor(ModelTag.SMA, values, horizon, config=config))
    tag = select_best_predictor(values, dates, tags, kind, config)
    return _clamp(kind, run_predictor(tag, values, horizon, dates, None, config))


def predict_future(patch_series: PatchIntervalSeries, sev_series: SeveritySeries,
                   predictor_set: Iterable = PREDICTOR_ORDER,
                   config: ForecastConfig = ForecastConfig()) -> TrendAssessment:
    """Forecast both trends from the full history with the best predictor and assess the device.

    The horizon is 34% of the history length (at least one step); two-point
    histories get a mean forecast, shorter ones none.
    """
    tags = _ordered(predictor_set)
    pt_fc = _future("pt", patch_series.dates, patch_series.values, tags, config)
    vt_fc = _future("vt", sev_series.dates, sev_series.values, tags, config)
    return assess_device(patch_series, sev_series, pt_fc, vt_fc)


# --- corpus ----------------------------------------------------------------

def _median_or_none(xs: list[float]) -> Optional[float]:
    return series_median(xs) if xs else None


def _pct(num: int, den: int) -> Optional[float]:
    return 100.0 * num / den if den else None


def _category_block(pairs: list[tuple[bool, int, int]]) -> dict:
    """``pairs`` holds (evaluable, predicted rank, observed rank) per device."""
    correct = sum(1 for _, p, o in pairs if p == o)
    evaluable = [x for x in pairs if x[0]]
    correct_eval = sum(1 for _, p, o in evaluable if p == o)
    return {
        "devices": len(pairs),
        "correct": correct,
        "evaluable": len(evaluable),
        "correct_evaluable": correct_eval,
        "accuracy_all": _pct(correct, len(pairs)),
        "accuracy_evaluable": _pct(correct_eval, len(evaluable)),
        "too_high": sum(1 for _, p, o in pairs if p > o),
        "too_low": sum(1 for _, p, o in pairs if p < o),
    }


def _rank(enum_cls, value: str) -> int:
    return enum_cls(value).rank


def aggregate_corpus(evals: Sequence[DeviceEvaluation]) -> dict:
    """Median errors per predictor and category accuracies, as a JSON-ready dict.

    Accuracies are reported against all devices and against devices with
    enough data in that trend; an FDSRI is evaluable when either trend is.
    """
    if not evals:
        raise EmptyCorpus("no device evaluations")
    evals = sorted(evals, key=lambda e: e.device_id)
    keys = list(evals[0].results)
    categories = sorted({e.category for e in evals})

    errors, accuracy, by_category = {}, {}, {}
    for key in keys:
        if key != BEST:
            errors[key] = {}
            for kind in ("pt", "vt"):
                ms = [getattr(e.results[key], kind).metrics for e in evals]
                ms = [m for m in ms if m is not None]
                errors[key][kind] = {
                    "devices": len(ms),
                    "rmse_median": _median_or_none([m.rmse for m in ms]),
                    "mad_median": _median_or_none([m.mad for m in ms]),
                }
        rows = {"pt": [], "vt": [], "fdsri": []}
        cat_rows = {c: {"pt": [], "vt": [], "fdsri": []} for c in categories}
        for e in evals:
            r = e.results[key]
            entry = {
                "pt": (e.pt_skip is None, _rank(PatchTrend, r.pt.predicted), _rank(PatchTrend, r.pt.observed)),
                "vt": (e.vt_skip is None, _rank(VulnTrend, r.vt.predicted), _rank(VulnTrend, r.vt.observed)),
                "fdsri": (e.pt_skip is None or e.vt_skip is None,
                          r.predicted_fdsri.rank, r.observed_fdsri.rank),
            }
            for kind, row in entry.items():
                rows[kind].append(row)
                cat_rows[e.category][kind].append(row)
        accuracy[key] = {kind: _category_block(v) for kind, v in rows.items()}
        by_category[key] = {c: {kind: _category_block(v) for kind, v in cat_rows[c].items()}
                            for c in categories}

    selections = {kind: {} for kind in ("pt", "vt")}
    for e in evals:
        for kind in ("pt", "vt"):
            tag = e.best_tags.get(kind)
            if tag:
                selections[kind][tag] = selections[kind].get(tag, 0) + 1

    return {
        "devices": len(evals),
        "predictors": [k for k in keys if k != BEST],
        "device_counts": {c: sum(1 for e in evals if e.category == c) for c in categories},
        "errors": errors,
        "accuracy": {k: v for k, v in accuracy.items() if k != BEST},
        "best": {"accuracy": accuracy[BEST], "by_category": by_category[BEST],
                 "selected": {k: dict(sorted(v.items())) for k, v in selections.items()}},
        "by_category": {k: v for k, v in by_category.items() if k != BEST},
        "per_device": [e.to_dict() for e in evals],
    }


def _evaluate_one(args):
    patch, sev, tags, ratio, config, category = args
    return evaluate_device(patch, sev, tags, ratio, config, category)


def evaluate_workspace(ws: DatasetWorkspace, predictor_set: Iterable = PREDICTOR_ORDER,
                       split_ratio: float = 0.66, config: ForecastConfig = ForecastConfig(),
                       jobs: int = 1) -> list[DeviceEvaluation]:
    """Evaluate all devices, in parallel when ``jobs > 1``; output is ordered by device id."""
    tags = tuple(t.value for t in _ordered(predictor_set))
    devices = sorted(ws.devices, key=lambda d: d.id)
    work = [(ws.patch[d.id], ws.severity[d.id], tags, split_ratio, config, d.category.value)
            for d in devices]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    return [_evaluate_one(w) for w in work]


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_rows(report: dict) -> list[tuple[str, str, str, object]]:
    """Long-format ``(table, row, column, value)`` rows mirroring the corpus tables."""
    rows = []
    for tag, kinds in report["errors"].items():
        for kind, m in kinds.items():
            rows.append((f"{kind}_errors", tag, "devices", m["devices"]))
            rows.append((f"{kind}_errors", tag, "rmse_median", m["rmse_median"]))
            rows.append((f"{kind}_errors", tag, "mad_median", m["mad_median"]))
    for tag, kinds in list(report["accuracy"].items()) + [(BEST, report["best"]["accuracy"])]:
        for kind, block in kinds.items():
            rows.append((f"{kind}_accuracy", tag, "correct", f"{block['correct']}/{block['devices']}"))
            rows.append((f"{kind}_accuracy", tag, "accuracy_all", block["accuracy_all"]))
            rows.append((f"{kind}_accuracy", tag, "accuracy_evaluable", block["accuracy_evaluable"]))
            rows.append((f"{kind}_accuracy", tag, "too_high", block["too_high"]))
            rows.append((f"{kind}_accuracy", tag, "too_low", block["too_low"]))
    by_cat = dict(report["by_category"]) | {BEST: report["best"]["by_category"]}
    for tag, cats in by_cat.items():
        for cat, kinds in cats.items():
            for kind, block in kinds.items():
                rows.append((f"{kind}_accuracy_by_category", cat, tag, block["accuracy_all"]))
    for cat, n in report["device_counts"].items():
        rows.append(("device_counts", cat, "devices", n))
    return rows
