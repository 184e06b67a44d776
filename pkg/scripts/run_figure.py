"""Success-rate grid for one preset, written as CSV plus a gnuplot-ready table.

    python scripts/run_figure.py fig7 --trials 1000 --out results/
"""

import argparse
import logging
import time
from pathlib import Path

from pma import bench


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("preset", choices=sorted(bench.PRESETS))
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--algos", help="comma-separated subset")
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    overrides = dict(trials=args.trials, master_seed=args.seed)
    if args.algos:
        overrides["algorithms"] = tuple(args.algos.split(","))
    config = bench.preset(args.preset, **overrides)
    start = time.perf_counter()
    report = bench.run_experiment(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.preset}.csv").write_text(report.to_csv())
    (out / f"{args.preset}.dat").write_text(report.to_dat())
    logging.info("%s: %d rows in %.1fs -> %s", args.preset, len(report.rows), time.perf_counter() - start, out)


if __name__ == "__main__":
    main()
