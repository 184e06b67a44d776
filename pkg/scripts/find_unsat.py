"""Search small periods for an instance that no assignment can serve, at a given load."""

import argparse
import time
from fractions import Fraction

from pma.exact import search_unsat


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--load", default="4/5")
    ap.add_argument("--taus", default="1,2,3")
    ap.add_argument("--p-max", type=int, default=20)
    ap.add_argument("--budget", type=int, default=200_000)
    ap.add_argument("--time-limit", type=float, default=600)
    args = ap.parse_args()

    load = Fraction(args.load)
    for tau in (int(t) for t in args.taus.split(",")):
        start = time.perf_counter()
        found = search_unsat(range(tau, args.p_max + 1), tau, load, args.budget, time_limit=args.time_limit)
        took = time.perf_counter() - start
        if found is None:
            print(f"tau={tau}: nothing within budget ({took:.1f}s)")
        else:
            inst = found.instance
            print(f"tau={tau}: P={inst.period} delays={list(inst.delays)} after {found.tried} instances ({took:.1f}s)")


if __name__ == "__main__":
    main()
