#!/usr/bin/env python3
"""Sweep total supply for a two-player auction and emit a CSV trajectory.

One row per supply level: closed-form allocation, payments, the regime
label and the worst disagreement against the event engine.  Feed the CSV
to any plotting tool to see how arriving units are routed: first all to
the high-value player at the rival's price, then into budget-depletion
regimes, finally split between both players.
"""
import argparse
import sys

from clinch.core import validate_instance
from clinch.engine import solve
from clinch.two_player import solve_n2


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--v", type=float, nargs=2, default=[1.0, 2.0])
    parser.add_argument("--b", type=float, nargs=2, default=[3.0, 2.0])
    parser.add_argument("--s-max", type=float, default=12.0)
    parser.add_argument("--steps", type=int, default=120)
    args = parser.parse_args()

    v1, v2 = args.v
    b1, b2 = args.b
    writer = sys.stdout
    writer.write("s,x1,x2,pi1,pi2,regime,engine_gap\n")
    for k in range(1, args.steps + 1):
        s = args.s_max * k / args.steps
        out, label = solve_n2(v1, v2, b1, b2, s)
        ref = solve(validate_instance(values=[v1, v2], budgets=[b1, b2], supply=s))
        gap = max(abs(a - b) for a, b in zip(out.allocation + out.payments,
                                             ref.allocation + ref.payments))
        writer.write(f"{s:.6f},{out.allocation[0]:.9f},{out.allocation[1]:.9f},"
                     f"{out.payments[0]:.9f},{out.payments[1]:.9f},"
                     f"{label.regime.value},{gap:.3e}\n")


if __name__ == "__main__":
    main()
