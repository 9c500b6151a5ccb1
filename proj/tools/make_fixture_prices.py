#!/usr/bin/env python3
"""Writes the synthetic monthly price panel and basket manifest used by the
estimate-corr golden test.

Group returns are drawn from N(0, vol^2 * Sigma_fixture); every ticker adds its
own noise on top of its group return. A few cells are blanked to exercise
complete-case alignment. Output is deterministic for a given seed.
"""
import argparse
import csv
import json
from pathlib import Path

import numpy as np

GROUP_TICKERS = {
    "AI": ["SYN_AI"],
    "FinTech": ["SYN_FIN"],
    "Healthcare": ["SYN_HC"],
    "Consumer": ["SYN_CONS"],
    "SaaS": ["SYN_SAAS"],
    "CA": ["CA_1", "CA_2", "CA_3"],
    "NY": ["NY_1", "NY_2"],
    "MA": ["MA_1", "MA_2"],
    "OtherUS": ["OT_1", "OT_2"],
    "FirstTime": ["FT_1", "FT_2"],
    "Repeat": ["RP_1", "RP_2"],
}


def load_sigma(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    labels = rows[0][1:]
    values = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    kinds = {}
    with open(Path(path).with_suffix(".kinds.csv"), newline="") as f:
        for r in list(csv.reader(f))[1:]:
            kinds[r[0]] = r[1]
    return labels, values, kinds


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sigma", default="data/fixture_sigma.csv")
    ap.add_argument("--out-dir", default="data/fixtures")
    ap.add_argument("--months", type=int, default=72)
    ap.add_argument("--seed", type=int, default=20200131)
    args = ap.parse_args()

    labels, sigma, kinds = load_sigma(args.sigma)
    rng = np.random.default_rng(args.seed)
    vol = 0.06
    group_returns = rng.multivariate_normal(np.zeros(len(labels)), vol * vol * sigma,
                                            size=args.months, method="cholesky")

    tickers, columns = [], []
    for g, label in enumerate(labels):
        for t in GROUP_TICKERS[label]:
            noise = rng.normal(0.0, 0.3 * vol, size=args.months)
            tickers.append(t)
            columns.append(group_returns[:, g] + noise)
    returns = np.column_stack(columns)
    prices = 100.0 * np.exp(np.vstack([np.zeros(len(tickers)), np.cumsum(returns, axis=0)]))

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dates = []
    for k in range(args.months + 1):
        year, month = divmod(k, 12)
        dates.append(f"{2020 + year:04d}-{month + 1:02d}-01")
    blanks = {(10, "CA_2"), (37, "RP_1"), (55, "SYN_HC")}
    with open(out / "prices.csv", "w", newline="") as f:
        f.write("date," + ",".join(tickers) + "\n")
        for r, d in enumerate(dates):
            cells = ["NA" if (r, t) in blanks else f"{prices[r, c]:.6f}"
                     for c, t in enumerate(tickers)]
            f.write(d + "," + ",".join(cells) + "\n")

    manifest = {"groups": {label: {"kind": kinds[label], "tickers": GROUP_TICKERS[label]}
                           for label in labels}}
    with open(out / "baskets.json", "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
