#!/usr/bin/env python3
"""Tabulate the check constants over a (n, k, j) grid.

Closed-form constants are printed exactly; Monte Carlo constants carry
their standard errors.  Useful for eyeballing how much slack each
inequality has before running the full gate.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from quermass import verify as vf
from quermass.core import RngStream


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-n", type=int, default=5)
    parser.add_argument("--samples", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = RngStream(args.seed)
    header = (f"{'n':>2} {'k':>2} {'j':>2} {'alpha':>12} {'gamma':>12} "
              f"{'beta':>12} {'delta':>12} {'c':>12} {'c_sigma':>10} "
              f"{'c_prime':>12}")
    print(header)
    print("-" * len(header))
    for n in range(2, args.max_n + 1):
        for k in range(1, n):
            for j in range(0, n - k):
                c = vf.c_const(n, k, j, args.samples, rng)
                cp = vf.cprime_const(n, k, j, args.samples, rng)
                print(f"{n:>2} {k:>2} {j:>2} "
                      f"{vf.alpha_const(n, k, j):>12.6g} "
                      f"{vf.gamma_cor12_const(n, k, j):>12.6g} "
                      f"{vf.beta_thm34_const(n, k, j):>12.6g} "
                      f"{vf.delta_const(n, k, j):>12.6g} "
                      f"{c.value:>12.6g} {c.std_error:>10.3g} "
                      f"{cp.value:>12.6g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
