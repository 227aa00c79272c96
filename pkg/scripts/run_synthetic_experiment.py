#!/usr/bin/env python3
"""Noise sweep on synthetic corpora: per-predictor and best-path accuracy plus median errors.

Each grid point generates a corpus, runs the train/test harness on every
device and reports one CSV row per (noise level, predictor).
"""
import argparse
import csv
import sys
import time

from fdsri.evaluation import aggregate_corpus, evaluate_workspace
from fdsri.synthetic import corpus_workspace, generate_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-devices", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pt-noise", type=float, nargs="+", default=[0.35, 0.7, 1.0])
    ap.add_argument("--vt-noise", type=float, nargs="+", default=[0.8, 1.5, 2.5])
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", help="CSV file (default stdout)")
    args = ap.parse_args()

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["pt_noise", "vt_noise", "predictor", "pt_acc", "vt_acc", "fdsri_acc",
                "pt_rmse_median", "pt_mad_median", "vt_rmse_median", "vt_mad_median", "seconds"])
    for pt_noise, vt_noise in zip(args.pt_noise, args.vt_noise):
        t0 = time.perf_counter()
        ws = corpus_workspace(generate_corpus(args.n_devices, args.seed, pt_noise, vt_noise))
        report = aggregate_corpus(evaluate_workspace(ws, jobs=args.jobs))
        secs = time.perf_counter() - t0
        rows = [(k, report["accuracy"][k], report["errors"][k]) for k in report["predictors"]]
        rows.append(("BEST", report["best"]["accuracy"], None))
        for name, acc, err in rows:
            e = err or {"pt": {}, "vt": {}}
            w.writerow([pt_noise, vt_noise, name,
                        acc["pt"]["accuracy_all"], acc["vt"]["accuracy_all"], acc["fdsri"]["accuracy_all"],
                        e["pt"].get("rmse_median"), e["pt"].get("mad_median"),
                        e["vt"].get("rmse_median"), e["vt"].get("mad_median"), round(secs, 2)])
        fh.flush()
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
