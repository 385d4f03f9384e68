"""Writes the volatility fixture series and their 50-digit reference values.

Run from this directory: `python3 volatility_oracle.py`. Series values are
written with `repr` so they round-trip exactly into f64; the oracle reads the
same f64 values back as exact mpmath numbers.
"""
import csv
import math
import os
import random

import mpmath as mp

mp.mp.dps = 50
OUT = os.path.join(os.path.dirname(__file__), "..", "fixtures", "volatility")


def series():
    rng = random.Random(20240611)
    yield "constant", [42.5] * 12
    yield "one_e_one", [1.0, math.e, 1.0]
    yield "geometric", [3.0 * 1.01 ** i for i in range(50)]
    yield "alternating", [10.0 if i % 2 == 0 else 13.0 for i in range(40)]
    yield "daily_365", [1000.0 * math.exp(rng.gauss(0.0, 0.08)) for _ in range(365)]
    walk, level = [], 50.0
    for _ in range(200):
        level *= math.exp(rng.gauss(0.0005, 0.12))
        walk.append(level)
    yield "random_walk", walk
    yield "large_scale", [1e12 * (1.0 + 0.05 * rng.random()) for _ in range(64)]
    yield "tiny_scale", [1e-6 * (1.0 + 0.5 * rng.random()) for _ in range(64)]
    yield "heavy_tail", [math.exp(rng.gauss(2.0, 1.5)) for _ in range(120)]
    yield "near_constant", [7.0 + 1e-9 * i for i in range(30)]


def oracle_vol(values):
    xs = [mp.mpf(v) for v in values]
    rets = [mp.log(xs[i] / xs[i - 1]) for i in range(1, len(xs))]
    n = len(rets)
    mean = mp.fsum(rets) / n
    var = mp.fsum((r - mean) ** 2 for r in rets) / (n - 1)
    return rets, mp.sqrt(var)


def main():
    os.makedirs(OUT, exist_ok=True)
    rows = []
    for name, values in series():
        with open(os.path.join(OUT, f"{name}.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["incentive"])
            for v in values:
                w.writerow([repr(v)])
        rets, vol = oracle_vol(values)
        rows.append((name, len(values), mp.nstr(vol, 25), mp.nstr(mp.fsum(rets), 25)))
        if name == "daily_365":
            with open(os.path.join(OUT, "daily_365_rolling30.csv"), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["index", "volatility"])
                # windows of 30 consecutive returns ending at each return index
                for end in range(30, len(rets) + 1):
                    window = values[end - 30:end + 1]
                    _, v = oracle_vol(window)
                    w.writerow([end - 30, mp.nstr(v, 25)])
    with open(os.path.join(OUT, "expected.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "len", "volatility", "sum_returns"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
