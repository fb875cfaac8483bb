"""Phase-length sweep for the coarse/zoom/validate scheme.

For every (N1, N2, N3) combination the script reports the end-to-end
targeting rate log2(1/delta)/E[tau] and the error rate, next to the
best non-adaptive rate I(q*, q*).
"""

import argparse
import csv
import itertools
import math
import os

from mdsearch.channels import ChannelModel
from mdsearch.optimize import optimal_query_size, phase2_functional
from mdsearch.sim_stationary import ConfigError, SearchConfig, run_two_phase


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--N1", type=int, nargs="+", default=[20, 25, 30, 40])
    ap.add_argument("--N2", type=int, nargs="+", default=[18, 20, 22, 26])
    ap.add_argument("--N3", type=int, nargs="+", default=[3, 4, 6])
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    model = ChannelModel.linear_bsc(0.7, 0.1)
    i_star = optimal_query_size(model).value
    q2, i2 = phase2_functional(model, 0.1)
    print(f"I(q*,q*) = {i_star:.5f}; zoom-phase limit {i2:.5f} at q = {q2:.4f}")
    path = os.path.join(args.out, "two_phase_sweep.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N1", "N2", "N3", "rate", "error_rate", "erasure_rate", "mean_tau"])
        for n1, n2, n3 in itertools.product(args.N1, args.N2, args.N3):
            cfg = SearchConfig(model, delta=1e-3, alpha=0.1, N1=n1, N2=n2, N3=n3,
                               trials=args.trials, seed=args.seed)
            try:
                rep = run_two_phase(cfg)
            except ConfigError as exc:
                print(f"skip N1={n1} N2={n2} N3={n3}: {exc}")
                continue
            rate = math.log2(1000) / rep.mean_stopping_time
            w.writerow([n1, n2, n3, f"{rate:.12g}", f"{rep.error_rate:.12g}",
                        f"{rep.erasure_rate:.12g}", f"{rep.mean_stopping_time:.12g}"])
            flag = " *" if rate > i_star and rep.error_rate < 0.05 else ""
            print(f"N1={n1:3d} N2={n2:3d} N3={n3:2d}: rate {rate:.4f} error {rep.error_rate:.4f} "
                  f"erasure {rep.erasure_rate:.3f}{flag}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
