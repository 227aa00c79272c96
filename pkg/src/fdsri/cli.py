"""Command-line entry point: ingest, evaluate, predict, report."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .core import DeviceModel, FdsriError
from .evaluation import (EmptyCorpus, aggregate_corpus, evaluate_workspace, predict_future,
                         report_json, report_rows)
from .forecasting.base import ModelTag
from .forecasting.predictors import PREDICTOR_ORDER, ForecastConfig
from .forecasting.trend import TAU_GRID
from .ingestion import (CorruptWorkspace, DatasetWorkspace, UnknownCveInNote,
                        build_device_dataset, file_digest, load_cve_feed, load_workspace,
                        parse_release_notes, save_workspace)

log = logging.getLogger("fdsri")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2
HIST_BINS = 60
PREDICTOR_NAMES = {"ar": ModelTag.AR, "arima": ModelTag.ARIMA, "sma": ModelTag.SMA,
                   "trend": ModelTag.TREND}


class InputError(Exception):
    pass


@dataclass
class CliConfig:
    workspace: Path
    ratio: float = 0.66
    predictors: tuple[ModelTag, ...] = PREDICTOR_ORDER
    max_p: int = 12
    max_q: int = 12
    d_max: int = 2
    stepwise: bool = True
    tau_grid: tuple[float, ...] = TAU_GRID
    out: Optional[Path] = None
    jobs: int = 1

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise InputError("--ratio must lie in (0, 1)")
        if min(self.max_p, self.max_q, self.d_max) < 0:
            raise InputError("grid bounds must be >= 0")
        if self.d_max > 12:
            raise InputError("--max-d must be <= 12")
        if self.jobs < 1:
            raise InputError("--jobs must be >= 1")
        if not self.tau_grid or min(self.tau_grid) <= 0:
            raise InputError("--tau-grid values must be positive")

    @property
    def forecast(self) -> ForecastConfig:
        return ForecastConfig(max_p=self.max_p, max_q=self.max_q, d_max=self.d_max,
                              stepwise=self.stepwise, tau_grid=self.tau_grid)

    @property
    def out_dir(self) -> Path:
        return self.out or self.workspace


def _parse_predictors(values: Sequence[str]) -> tuple[ModelTag, ...]:
    names: list[str] = []
    for v in values:
        names += [x.strip().lower() for x in v.split(",") if x.strip()]
    if not names or "all" in names:
        return PREDICTOR_ORDER
    unknown = [n for n in names if n not in PREDICTOR_NAMES]
    if unknown:
        raise InputError(f"unknown predictor(s): {', '.join(unknown)}")
    wanted = {PREDICTOR_NAMES[n] for n in names}
    return tuple(t for t in PREDICTOR_ORDER if t in wanted)


def _config(args) -> CliConfig:
    return CliConfig(
        workspace=Path(args.workspace), ratio=args.ratio,
        predictors=_parse_predictors(args.predictors or ["all"]),
        max_p=args.max_p, max_q=args.max_q, d_max=args.max_d, stepwise=not args.exhaustive,
        tau_grid=tuple(args.tau_grid) if args.tau_grid else TAU_GRID,
        out=Path(args.out) if args.out else None, jobs=args.jobs)


def _load_nonempty(path: Path) -> DatasetWorkspace:
    ws = load_workspace(path)
    if not ws.devices:
        raise InputError(f"workspace {path} holds no devices")
    return ws


# --- ingest ----------------------------------------------------------------

def _note_files(paths: Sequence[str]) -> dict[str, Path]:
    files: dict[str, Path] = {}
    for p in map(Path, paths):
        if p.is_dir():
            for f in sorted(p.glob("*.txt")):
                files[f.stem] = f
        elif p.is_file():
            files[p.stem] = p
        else:
            raise InputError(f"release notes not found: {p}")
    return files


def cmd_ingest(args) -> int:
    devices_path, feed_path = Path(args.devices), Path(args.feed)
    for p in (devices_path, feed_path):
        if not p.is_file():
            raise InputError(f"input file not found: {p}")
    try:
        raw = json.loads(devices_path.read_text(encoding="utf-8"))
        devices = [(DeviceModel.from_dict(d), d.get("products")) for d in raw]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"{devices_path}: {exc}") from None
    feed = load_cve_feed(feed_path)
    note_files = _note_files(args.notes or [])
    unknown = sorted(set(note_files) - {d.id for d, _ in devices})
    if unknown:
        raise InputError(f"release notes for unregistered devices: {', '.join(unknown)}")

    ws = DatasetWorkspace()
    ws.provenance = {str(devices_path): file_digest(devices_path), str(feed_path): file_digest(feed_path)}
    dangling = 0
    for device, products in devices:
        notes = []
        if device.id in note_files:
            path = note_files[device.id]
            ws.provenance[str(path)] = file_digest(path)
            notes = parse_release_notes(path.read_text(encoding="utf-8"), args.parser)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", UnknownCveInNote)
            patch, sev = build_device_dataset(device, notes, feed, products)
        for w in caught:
            if issubclass(w.category, UnknownCveInNote):
                dangling += 1
                print(f"warning: {w.message}", file=sys.stderr)
        ws.add(device, patch, sev)
        print(f"{device.id}: {len(sev)} CVEs, {len(patch)} patches")
    save_workspace(ws, args.workspace)
    if dangling:
        print(f"{dangling} warning(s): release notes fixing CVEs absent from the feed")
    return EXIT_OK


# --- evaluate / predict ----------------------------------------------------

def _fmt(x) -> str:
    return "-" if x is None else f"{x:.2f}"


def _write_report_csv(path: Path, report: dict) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "row", "column", "value"])
    for row in report_rows(report):
        w.writerow(["" if v is None else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    ws = _load_nonempty(cfg.workspace)
    evals = evaluate_workspace(ws, cfg.predictors, cfg.ratio, cfg.forecast, cfg.jobs)
    report = aggregate_corpus(evals)
    report["config"] = {"ratio": cfg.ratio, "predictors": [t.value for t in cfg.predictors],
                        "max_p": cfg.max_p, "max_q": cfg.max_q, "max_d": cfg.d_max,
                        "stepwise": cfg.stepwise, "tau_grid": list(cfg.tau_grid)}
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report_json(report), encoding="utf-8", newline="")
    _write_report_csv(out / "report.csv", report)

    print(f"{'predictor':<10}{'PT RMSE':>10}{'PT MAD':>9}{'VT RMSE':>9}{'VT MAD':>8}"
          f"{'PT %':>8}{'VT %':>8}{'FDSRI %':>9}")
    rows = [(k, report["errors"][k], report["accuracy"][k]) for k in report["predictors"]]
    rows.append(("BEST", None, report["best"]["accuracy"]))
    for name, err, acc in rows:
        e = err or {"pt": {}, "vt": {}}
        print(f"{name:<10}{_fmt(e['pt'].get('rmse_median')):>10}{_fmt(e['pt'].get('mad_median')):>9}"
              f"{_fmt(e['vt'].get('rmse_median')):>9}{_fmt(e['vt'].get('mad_median')):>8}"
              f"{_fmt(acc['pt']['accuracy_all']):>8}{_fmt(acc['vt']['accuracy_all']):>8}"
              f"{_fmt(acc['fdsri']['accuracy_all']):>9}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _config(args)
    ws = _load_nonempty(cfg.workspace)
    lines = []
    for d in sorted(ws.devices, key=lambda d: d.id):
        a = predict_future(ws.patch[d.id], ws.severity[d.id], cfg.predictors, cfg.forecast)
        lines.append(f"{d.id}, {a.pt.value}, {a.vt.value}, {a.fdsri.value}")
    print("\n".join(lines))
    if cfg.out:
        cfg.out.mkdir(parents=True, exist_ok=True)
        (cfg.out / "predictions.csv").write_text(
            "device_id,pt,vt,fdsri\n" + "".join(l.replace(", ", ",") + "\n" for l in lines),
            encoding="utf-8", newline="")
    return EXIT_OK


# --- report ----------------------------------------------------------------

def histogram(values: Sequence[float], bins: int = HIST_BINS) -> list[tuple[float, float, int]]:
    """Equal-width bins from 0 to the maximum value; empty bins are kept."""
    upper = max(values) if len(values) else 0.0
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins,
                                 range=(0.0, float(upper) if upper > 0 else 1.0))
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bins)]


def _write_hist(path: Path, rows) -> None:
    lines = ["bin_start,bin_end,count"]
    lines += [f"{lo!r},{hi!r},{c}" for lo, hi, c in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def _describe(label: str, values: Sequence[float], unit: str) -> str:
    if not len(values):
        return f"{label}: none"
    v = np.asarray(values, dtype=float)
    q1, q2, q3 = np.percentile(v, [25, 50, 75])
    return (f"{label}: n={len(v)} mean={v.mean():.2f} min={v.min():g} q1={q1:g} "
            f"median={q2:g} q3={q3:g} max={v.max():g} {unit}")


def corpus_summary(ws: DatasetWorkspace) -> list[str]:
    intervals = [v for s in ws.patch.values() for v in s.values]
    severities = [v for s in ws.severity.values() for v in s.values]
    vulns = [len(ws.severity[d.id]) for d in ws.devices]
    patches = [len(ws.patch[d.id]) for d in ws.devices]
    patched = [n for n in patches if n > 0]
    return [
        f"devices: {len(ws.devices)}",
        f"devices without patches: {sum(1 for n in patches if n == 0)}",
        f"devices without vulnerabilities: {sum(1 for n in vulns if n == 0)}",
        f"patches per device: mean={np.mean(patches):.2f}"
        + (f", mean over patched devices={np.mean(patched):.2f}" if patched else ""),
        _describe("patch intervals", intervals, "days"),
        _describe("vulnerabilities per device", vulns, "CVEs"),
        _describe("CVSS severities", severities, "CVSS"),
    ]


def cmd_report(args) -> int:
    ws = load_workspace(Path(args.workspace))
    print("\n".join(corpus_summary(ws)))
    if args.histograms:
        out = Path(args.out) if args.out else Path(args.workspace)
        out.mkdir(parents=True, exist_ok=True)
        intervals = [v for s in ws.patch.values() for v in s.values]
        # only devices with more than one vulnerability are plotted
        vulns = [len(ws.severity[d.id]) for d in ws.devices if len(ws.severity[d.id]) > 1]
        _write_hist(out / "hist_patch_intervals.csv", histogram(intervals))
        _write_hist(out / "hist_vulns_per_device.csv", histogram(vulns))
        print(f"histograms written to {out}")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------

def _add_eval_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workspace", required=True)
    p.add_argument("--ratio", type=float, default=0.66, help="training share of each series")
    p.add_argument("--predictors", action="append", metavar="{ar,arima,sma,trend,all}",
                   help="comma separated or repeated; default all")
    p.add_argument("--max-p", type=int, default=12)
    p.add_argument("--max-q", type=int, default=12)
    p.add_argument("--max-d", type=int, default=2)
    p.add_argument("--exhaustive", action="store_true", help="full (p, q) grid instead of stepwise")
    p.add_argument("--tau-grid", type=float, nargs="+", help="changepoint prior scales")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory (default: the workspace)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdsri", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a workspace from devices, a CVE feed and release notes")
    p.add_argument("--devices", required=True, help="JSON array of devices")
    p.add_argument("--feed", required=True, help="normalized CVE feed (JSON)")
    p.add_argument("--notes", nargs="*", help="release-note files or directories (<device id>.txt)")
    p.add_argument("--parser", default="reference", help="release-note parser id")
    p.add_argument("--workspace", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("evaluate", help="train/test evaluation of all predictors")
    _add_eval_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="forecast PT, VT and FDSRI per device")
    _add_eval_options(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("report", help="corpus statistics and histograms")
    p.add_argument("--workspace", required=True)
    p.add_argument("--histograms", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, FdsriError, EmptyCorpus, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        log.exception("internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
