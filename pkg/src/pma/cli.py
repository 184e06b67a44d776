"""Command line entry point ``pma``.

Exit codes: 0 ok (including heuristic give-ups, printed as ``UNKNOWN``),
1 usage or input error, 2 proven unsatisfiable, 3 solver timeout.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import bench, compact, exact, reductions, sizeone
from .core import Instance

EXIT_OK, EXIT_USAGE, EXIT_UNSAT, EXIT_TIMEOUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _instance(path: str) -> Instance:
    try:
        return Instance.from_dict(_read_json(path))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad instance in {path}: {exc}") from None


def _dump(obj) -> str:
    return json.dumps(obj) + "\n"


# --- commands ----------------------------------------------------------------------


def cmd_gen(args) -> int:
    inst = bench.gen_instance(args.P, args.tau, args.n, args.dist, args.seed)
    _write(_dump(inst.to_dict()), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _instance(args.input)
    options = {}
    if args.algo == "exact":
        options["time_limit"] = args.time_limit
    if args.algo in ("compact-k", "compact-tuples"):
        options["k"] = args.k
    res = bench.run_solver(args.algo, inst, args.seed, **options)
    if res.status == "error":
        raise UsageError(res.detail)
    if res.status == exact.SAT:
        _write(_dump({"offsets": list(res.offsets)}), args.out)
        return EXIT_OK
    if res.status == exact.UNSAT:
        _write(_dump("UNSAT"), args.out)
        return EXIT_UNSAT
    _write(_dump("UNKNOWN"), args.out)
    if res.detail:
        print(res.detail, file=sys.stderr)
    return EXIT_TIMEOUT if res.status == exact.TIMEOUT else EXIT_OK


def _bench_config(args) -> bench.ExperimentConfig:
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.algos:
        overrides["algorithms"] = tuple(args.algos.split(","))
    if args.config:
        data = _read_json(args.config)
        return bench.ExperimentConfig.from_dict({**data, **overrides})
    return bench.preset(args.preset, **overrides)


def cmd_bench(args) -> int:
    if (args.config is None) == (args.preset is None):
        raise UsageError("give exactly one of --config or --preset")
    if args.preset == "fig13":
        spec = bench.TIMING_PRESET
        algos = args.algos.split(",") if args.algos else spec["algorithms"]
        trials = args.trials if args.trials is not None else spec["trials"]
        chunks = [bench.timing_profile(a, spec["n_grid"], trials=trials, seed=args.seed or 0).to_csv() for a in algos]
        _write("".join(chunks), args.out)
        return EXIT_OK
    try:
        config = _bench_config(args)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    report = bench.run_experiment(config)
    _write(report.to_csv(), args.out)
    if args.dat:
        Path(args.dat).write_text(report.to_dat())
    return EXIT_OK


def cmd_prob(args) -> int:
    ns = range(1, args.m + 1) if args.grid else [args.n]
    lines = ["m,n,load,probability"]
    for n in ns:
        try:
            p = sizeone.success_probability(args.m, n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        lines.append(f"{args.m},{n},{float(Fraction(n, args.m)):.6g},{p:.10g}")
    _write("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    _write(compact.bound_table(args.k).to_csv(), args.out)
    return EXIT_OK


def _record_path(out: str) -> str:
    return out + ".record.json"


def cmd_reduce(args) -> int:
    inst = _instance(args.input)
    try:
        if args.mode == "normalize":
            rec = reductions.normalize_period(inst)
        elif args.mode == "unit":
            rec = reductions.to_unit_size(inst)
        elif args.mode == "buffer":
            rec = reductions.buffer_to_multiple(inst, args.k)
        else:
            rec = reductions.buffer_to_reference(inst, args.t0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(_dump(rec.reduced.to_dict()), args.out)
    record_file = _record_path(args.out) if args.out and args.out != "-" else args.record
    if record_file:
        Path(record_file).write_text(_dump(rec.to_dict()))
    return EXIT_OK


def cmd_pullback(args) -> int:
    rec = reductions.ReductionRecord.from_dict(_read_json(args.record))
    data = _read_json(args.assignment)
    if not isinstance(data, dict) or "offsets" not in data:
        raise UsageError(f"{args.assignment} holds no offsets")
    try:
        offsets = reductions.pullback(rec, data["offsets"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(_dump({"offsets": list(offsets)}), args.out)
    return EXIT_OK


def cmd_find_unsat(args) -> int:
    periods = range(max(args.tau, 1), args.p_max + 1)
    found = exact.search_unsat(periods, args.tau, Fraction(args.load), args.budget, args.seed, args.time_limit)
    if found is None:
        _write(_dump("UNKNOWN"), args.out)
        print(f"no unsatisfiable instance within a budget of {args.budget} solver calls", file=sys.stderr)
        return EXIT_OK
    _write(_dump({**found.instance.to_dict(), "status": found.result.status, "nodes": found.result.nodes}), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pma", description="Periodic message assignment on a shared link.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="draw a random instance")
    g.add_argument("--P", type=int, required=True)
    g.add_argument("--tau", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dist", choices=bench.DISTRIBUTIONS, default="uniform")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("--algo", choices=sorted(bench.SOLVERS), required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--k", type=int, default=8, help="tuple size for compact-k")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="success-rate grid or timing profile")
    b.add_argument("--config")
    b.add_argument("--preset", choices=sorted(bench.PRESETS) + ["fig13"])
    b.add_argument("--trials", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--algos", help="comma-separated subset of algorithms")
    b.add_argument("--out")
    b.add_argument("--dat", help="also write a whitespace-separated table for plotting")
    b.set_defaults(func=cmd_bench)

    pr = sub.add_parser("prob", help="success probability of Greedy Uniform")
    pr.add_argument("--m", type=int, required=True)
    pr.add_argument("--n", type=int)
    pr.add_argument("--grid", action="store_true", help="all n from 1 to m")
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_prob)

    bd = sub.add_parser("bounds", help="load bound table for compact k-tuples")
    bd.add_argument("--k", type=int, required=True)
    bd.add_argument("--out")
    bd.set_defaults(func=cmd_bounds)

    r = sub.add_parser("reduce", help="transform an instance")
    r.add_argument("--mode", choices=["normalize", "unit", "buffer", "reference"], required=True)
    r.add_argument("--k", type=int, default=1)
    r.add_argument("--t0", type=int, default=None)
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--out")
    r.add_argument("--record", help="record file (default: OUT.record.json)")
    r.set_defaults(func=cmd_reduce)

    pb = sub.add_parser("pullback", help="map a reduced assignment back")
    pb.add_argument("--record", required=True)
    pb.add_argument("--assignment", required=True)
    pb.add_argument("--out")
    pb.set_defaults(func=cmd_pullback)

    f = sub.add_parser("find-unsat", help="search an unsatisfiable instance at a given load")
    f.add_argument("--load", type=str, required=True, help="e.g. 0.8 or 4/5")
    f.add_argument("--p-max", type=int, required=True)
    f.add_argument("--budget", type=int, default=10_000)
    f.add_argument("--tau", type=int, default=1)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--time-limit", type=float, default=None)
    f.add_argument("--out")
    f.set_defaults(func=cmd_find_unsat)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "prob" and not args.grid and args.n is None:
        parser.error("prob needs --n or --grid")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pma: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
