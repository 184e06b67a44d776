"""Mean solve time against n at load 1 and the fitted log-log slope, per algorithm."""

import argparse

from pma import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--algos", default=",".join(bench.TIMING_PRESET["algorithms"]))
    ap.add_argument("--grid", default="50,100,200,400")
    ap.add_argument("--trials", type=int, default=bench.TIMING_PRESET["trials"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    grid = [int(n) for n in args.grid.split(",")]
    for algo in args.algos.split(","):
        prof = bench.timing_profile(algo, grid, trials=args.trials, seed=args.seed)
        print(prof.to_csv(), end="")


if __name__ == "__main__":
    main()
