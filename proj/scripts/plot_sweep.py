#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Plot one or more columns of a `mmslam simulate` CSV against the sweep axis.

    python3 scripts/plot_sweep.py results.csv position_rmse_m center_rmse_m_facade --out fig.png

Needs matplotlib; the C++ build does not depend on this script.
"""
import argparse
import csv

import matplotlib.pyplot as plt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("columns", nargs="+")
    ap.add_argument("--out", help="write the figure here instead of showing it")
    ap.add_argument("--log", action="store_true", help="logarithmic y axis")
    args = ap.parse_args()

    with open(args.csv, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise SystemExit(f"{args.csv}: no rows")
    axis = next(iter(rows[0]))
    x = [float(r[axis]) for r in rows]

    fig, ax = plt.subplots()
    for col in args.columns:
        if col not in rows[0]:
            raise SystemExit(f"{args.csv}: no column '{col}'")
        ax.plot(x, [float(r[col]) for r in rows], marker="o", label=col)
    ax.set_xlabel(axis)
    ax.set_ylabel("RMSE")
    if args.log:
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if args.out:
        fig.savefig(args.out, dpi=150, bbox_inches="tight")
    else:
        plt.show()


if __name__ == "__main__":
    main()
