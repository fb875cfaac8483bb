"""Empirical error exponent of non-adaptive search against the random-coding exponent.

Rate is held at R (M = 2**(R N)) while N grows; the ratio of
-log2(error)/N to the random-coding exponent is printed for each N.
"""

import argparse
import math

from mdsearch.channels import ChannelModel
from mdsearch.infotheory import random_coding_exponent
from mdsearch.sim_stationary import SearchConfig, run_nonadaptive


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rate", type=float, default=0.25)
    ap.add_argument("--N", type=int, nargs="+", default=[24, 32, 40])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    model = ChannelModel.linear_bsc(0.0, 0.1)
    target = random_coding_exponent(args.rate, 0.5, 0.5, model)
    print(f"random-coding exponent at R={args.rate}: {target:.5f}")
    for N in args.N:
        M = 2 ** round(args.rate * N)
        rep = run_nonadaptive(SearchConfig(model, delta=1 / M, N=N, prior=0.5, trials=args.trials, seed=args.seed))
        e = rep.error_rate
        ratio = -math.log2(e) / N / target if e > 0 else math.inf
        print(f"N={N:3d} M={M:5d}: error {e:.3e} [{rep.error_ci[0]:.2e}, {rep.error_ci[1]:.2e}] ratio {ratio:.2f}")


if __name__ == "__main__":
    main()
