"""Guaranteed load of Compact k-Tuples for a range of k."""

import argparse

from pma.compact import bound_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--csv", action="store_true", help="print the full table for each k")
    args = ap.parse_args()

    print("k guaranteed asymptotic min_n")
    for k in range(1, args.k_max + 1):
        t = bound_table(k)
        print(f"{k} {t.guaranteed_load} {float(t.asymptotic_load):.6f} {t.min_n}")
        if args.csv:
            print(t.to_csv())


if __name__ == "__main__":
    main()
