"""Exponent curves of the stationary schemes on a shared rate grid.

Same table as ``mdsearch exponents``; also prints where each curve
reaches zero.
"""

import argparse
import csv
import os
import warnings

from mdsearch.channels import ChannelModel
from mdsearch.cli import EXPONENT_COLUMNS, exponent_table
from mdsearch.infotheory import RhoBoundaryWarning


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--a", type=float, default=0.7)
    ap.add_argument("--b", type=float, default=0.1)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--rho-max", type=float, default=20.0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    model = ChannelModel.linear_bsc(args.a, args.b)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RhoBoundaryWarning)
        rates, cols = exponent_table(model, args.points, args.rho_max)
    path = os.path.join(args.out, "exponent_curves.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rate", *EXPONENT_COLUMNS])
        for i, r in enumerate(rates):
            w.writerow([f"{r:.12g}", *(f"{cols[c][i] + 0.0:.12g}" for c in EXPONENT_COLUMNS)])
    for c in EXPONENT_COLUMNS:
        zero = next((r for r, v in zip(rates, cols[c]) if v == 0), None)
        where = f"{zero:.5f}" if zero is not None else "beyond the grid"
        print(f"{c:>22}: E(0) = {cols[c][0]:.5f}, first zero at R = {where}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
