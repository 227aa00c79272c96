#!/usr/bin/env python3
"""Large-sample rates behind the seeded statistical checks.

Reports ADF size and power, AR(2) order-selection frequency and
coefficient error, and ARIMA differencing choices over many seeds, so
that results on a 10- or 20-seed set can be read against the underlying
rate.
"""
import argparse

import numpy as np

from fdsri.forecasting import adf_test, fit_ar, fit_ar_order
from fdsri.forecasting.arima import choose_d


def simulate_ar(phi, n, seed, burn=200):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(n + burn)
    y = np.zeros(n + burn)
    for t in range(len(phi), n + burn):
        y[t] = sum(p * y[t - i] for i, p in enumerate(phi, 1)) + e[t]
    return y[burn:]


def binom_tail(k, n, p):
    from math import comb
    return sum(comb(n, j) * p ** j * (1 - p) ** (n - j) for j in range(k, n + 1))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=1000)
    ap.add_argument("--max-lag", type=int, default=12)
    args = ap.parse_args()
    S = range(args.seeds)

    noise = np.mean([adf_test(np.random.default_rng(s).standard_normal(200)).reject_unit_root for s in S])
    walk = np.mean([adf_test(np.cumsum(np.random.default_rng(s).standard_normal(200))).reject_unit_root
                    for s in S])
    print(f"ADF n=200: power on white noise {noise:.3f}, size on random walks {walk:.3f}")

    truth = np.array([0.5, -0.3])
    orders, errs = [], []
    for s in S:
        y = simulate_ar(truth, 500, s)
        orders.append(fit_ar(y, args.max_lag).lag_order)
        errs.append(np.abs(np.array(fit_ar_order(y, 2).coefficients) - truth).max())
    rate = np.mean(np.array(orders) == 2)
    exceed = np.mean(np.array(errs) > 0.1)
    print(f"AR(2) n=500, max lag {args.max_lag}: order 2 chosen {rate:.3f}; "
          f"P(>=8 of 10 seeds) = {binom_tail(8, 10, rate):.3f}")
    print(f"  order histogram {np.bincount(orders).tolist()}")
    print(f"  P(max |coef error| > 0.1 in one seed) = {exceed:.3f}; "
          f"P(all 10 seeds below 0.1) = {(1 - exceed) ** 10:.3f}")

    n_d = min(args.seeds, 200)
    d_walk = np.mean([choose_d(np.cumsum(np.random.default_rng(s).standard_normal(300))) == 1
                      for s in range(n_d)])
    d_ar = np.mean([choose_d(simulate_ar([0.6], 300, s)) == 0 for s in range(n_d)])
    print(f"ARIMA d choice n=300: d=1 on random walks {d_walk:.3f}, d=0 on AR(1) {d_ar:.3f}")


if __name__ == "__main__":
    main()
