#!/usr/bin/env python3
"""Independent check of the golden estimated correlation matrix.

Recomputes the group correlation from the raw price panel with numpy and
compares it with the committed CSV. Exit status 0 when every entry agrees to
within --tol.
"""
import argparse
import csv
import json
import sys

import numpy as np


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--prices", default="data/fixtures/prices.csv")
    ap.add_argument("--baskets", default="data/fixtures/baskets.json")
    ap.add_argument("--golden", default="data/fixtures/estimated_sigma.csv")
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()

    with open(args.prices, newline="") as f:
        rows = list(csv.reader(f))
    tickers = rows[0][1:]
    rows = sorted(rows[1:], key=lambda r: r[0])
    px = np.array([[np.nan if c == "NA" else float(c) for c in r[1:]] for r in rows])
    rets = np.diff(np.log(px), axis=0)

    groups = json.load(open(args.baskets))["groups"]
    labels = list(groups)
    cols = []
    for label in labels:
        idx = [tickers.index(t) for t in groups[label]["tickers"]]
        cols.append(rets[:, idx].mean(axis=1))
    data = np.column_stack(cols)
    data = data[~np.isnan(data).any(axis=1)]
    est = np.corrcoef(data, rowvar=False)

    with open(args.golden, newline="") as f:
        g = list(csv.reader(f))
    if g[0][1:] != labels:
        print("label mismatch", g[0][1:], labels)
        return 1
    golden = np.array([[float(x) for x in r[1:]] for r in g[1:]])
    diff = np.abs(golden - est).max()
    print(f"observations={data.shape[0]} max_abs_diff={diff:.3e} "
          f"min_eig={np.linalg.eigvalsh(est).min():.4f}")
    return 0 if diff <= args.tol else 1


if __name__ == "__main__":
    sys.exit(main())
