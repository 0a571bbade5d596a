#!/usr/bin/env python3
"""Error of the forward-Euler oracle against the exact engine, step by step.

Prints a halving table over a seeded corpus: max and mean componentwise
error at each step size and the shrink factor between rows.  The factor
settling near 2 is the first-order signature that certifies the two
implementations against each other.
"""
import argparse

import numpy as np

from clinch.checks import oracle_corpus, random_instances
from clinch.engine import solve
from clinch.oracle import solve_euler


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--h", type=float, default=8e-4,
                        help="coarsest step; five halvings follow")
    args = parser.parse_args()

    insts = random_instances(oracle_corpus(seed=args.seed, count=args.count))
    refs = [solve(inst) for inst in insts]
    print(f"{'h':>10s} {'max err':>12s} {'mean err':>12s} {'shrink':>8s}")
    prev = None
    h = args.h
    for _ in range(6):
        errs = []
        for inst, ref in zip(insts, refs):
            approx = solve_euler(inst, h)
            errs.append(max(abs(a - b) for a, b in
                            zip(approx.allocation + approx.payments,
                                ref.allocation + ref.payments)))
        mean = float(np.mean(errs))
        shrink = "" if prev is None else f"{prev / mean:8.2f}"
        print(f"{h:10.1e} {max(errs):12.3e} {mean:12.3e} {shrink:>8s}")
        prev = mean
        h /= 2.0


if __name__ == "__main__":
    main()
