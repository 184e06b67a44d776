"""Random instances, success-rate grids and timing fits.

Instances for a grid point come from one seeded block, so every algorithm
sees the same instances and adding an algorithm changes no other cell.
Randomized algorithms get their own stream per (algorithm, point, trial).
A trial only counts as a success when the returned offsets validate.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .compact import compact_fit, compact_k_tuples_solve, compact_pair_solve
from .core import Instance, is_valid
from .exact import SAT, TIMEOUT, exact_solve
from .greedy import first_fit, meta_offset
from .reductions import compact_pair_tau2_solve
from .sizeone import greedy_potential, greedy_uniform, swap_and_move

log = logging.getLogger(__name__)

DISTRIBUTIONS = ("uniform", "small")
CSV_HEADER = ("algo", "P", "tau", "n", "load", "trials", "successes", "rate", "mean_ms", "flags")


# --- solvers -------------------------------------------------------------------


@dataclass(frozen=True)
class SolveResult:
    """``status`` is ``sat``, ``fail`` (heuristic gave up), ``unsat``, ``timeout`` or ``error``."""

    status: str
    offsets: Optional[tuple[int, ...]] = None
    detail: str = ""


def _heuristic(fn: Callable) -> Callable:
    def run(instance, seed=None, **_):
        out = fn(instance)
        return SolveResult(SAT, out.offsets) if out.success else SolveResult("fail", None, f"stopped at message {out.failed}")

    return run


def _uniform(instance, seed=None, **_):
    out = greedy_uniform(instance, seed)
    return SolveResult(SAT, out.offsets) if out.success else SolveResult("fail", None, f"stopped at message {out.failed}")


def _tuples(instance, seed=None, k=8, **_):
    out = compact_k_tuples_solve(instance, k)
    return SolveResult(SAT, out.offsets) if out.success else SolveResult("fail", None, f"stopped at message {out.failed}")


def _exact(instance, seed=None, time_limit=None, node_limit=None, **_):
    res = exact_solve(instance, time_limit=time_limit, node_limit=node_limit)
    return SolveResult(res.status, res.offsets, f"{res.nodes} nodes")


SOLVERS: dict[str, Callable[..., SolveResult]] = {
    "first-fit": _heuristic(first_fit),
    "meta-offset": _heuristic(meta_offset),
    "compact-pair": _heuristic(compact_pair_solve),
    "compact-k": _tuples,
    "compact-tuples": _tuples,
    "compact-fit": _heuristic(compact_fit),
    "compact-pair-tau2": _heuristic(compact_pair_tau2_solve),
    "greedy-uniform": _uniform,
    "greedy-potential": _heuristic(greedy_potential),
    "swap-and-move": _heuristic(swap_and_move),
    "exact": _exact,
}
RANDOMIZED = {"greedy-uniform"}


def run_solver(name: str, instance: Instance, seed=None, **options) -> SolveResult:
    """Run a registered solver, turning argument errors into an ``error`` status."""
    try:
        solver = SOLVERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(SOLVERS)}") from None
    try:
        return solver(instance, seed=seed, **options)
    except ValueError as exc:
        return SolveResult("error", None, str(exc))


# --- instances -------------------------------------------------------------------


def _delay_bound(P: int, tau: int, dist: str) -> int:
    if dist == "uniform":
        return P
    if dist == "small":
        return tau
    raise ValueError(f"unknown delay distribution {dist!r}; choose from {', '.join(DISTRIBUTIONS)}")


def gen_instance(P: int, tau: int, n: int, dist: str = "uniform", seed=None) -> Instance:
    """``n`` delays drawn independently, uniform over ``[P]`` or (``small``) over ``[tau]``."""
    hi = _delay_bound(P, tau, dist)
    return Instance(P, tau, tuple(int(d) for d in np.random.default_rng(seed).integers(0, hi, n)))


def _algo_key(name: str) -> int:
    return zlib.crc32(name.encode())


def instance_block(P: int, tau: int, n: int, trials: int, dist: str, master_seed: int) -> np.ndarray:
    """Delays of every trial at one grid point, one row per trial."""
    hi = _delay_bound(P, tau, dist)
    seq = np.random.SeedSequence(master_seed, spawn_key=(P, tau, n, DISTRIBUTIONS.index(dist)))
    return np.random.default_rng(seq).integers(0, hi, (trials, n))


def trial_seed(master_seed: int, algo: str, P: int, tau: int, n: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(_algo_key(algo), P, tau, n, trial))


# --- experiments ---------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """One success-rate grid.  ``n_grid`` wins over ``load_grid`` when both are given."""

    period: int
    tau: int
    algorithms: tuple[str, ...] = ("first-fit", "meta-offset", "compact-pair", "compact-fit", "greedy-uniform")
    n_grid: tuple[int, ...] = ()
    load_grid: tuple[float, ...] = ()
    trials: int = 10_000
    dist: str = "uniform"
    master_seed: int = 0
    time_limit: Optional[float] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.n_grid = tuple(int(n) for n in self.n_grid)
        self.load_grid = tuple(self.load_grid)
        if self.trials < 0:
            raise ValueError(f"trials must be >= 0, got {self.trials}")
        if not self.n_grid and not self.load_grid:
            raise ValueError("experiment needs an n grid or a load grid")
        _delay_bound(self.period, self.tau, self.dist)
        for a in self.algorithms:
            if a not in SOLVERS:
                raise ValueError(f"unknown algorithm {a!r}")

    def points(self) -> list[int]:
        if self.n_grid:
            return list(self.n_grid)
        ns = [int(Fraction(str(l)) * self.period / self.tau) for l in self.load_grid]
        return sorted(set(n for n in ns if n > 0))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        if "P" in data:
            data["period"] = data.pop("P")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ExperimentRow:
    algo: str
    P: int
    tau: int
    n: int
    trials: int
    successes: int
    mean_ms: float
    flags: str = ""

    @property
    def load(self) -> Fraction:
        return Fraction(self.n * self.tau, self.P)

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def cells(self, timing: bool = True) -> list[str]:
        return [
            self.algo, str(self.P), str(self.tau), str(self.n), f"{float(self.load):.6g}", str(self.trials),
            str(self.successes), f"{self.rate:.6f}", f"{self.mean_ms:.4f}" if timing else "", self.flags,
        ]


@dataclass
class ExperimentReport:
    rows: list[ExperimentRow] = field(default_factory=list)

    def to_csv(self, timing: bool = True) -> str:
        """CSV with a fixed header; ``timing=False`` blanks ``mean_ms`` for reproducibility checks."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in self.rows:
            w.writerow(row.cells(timing))
        return buf.getvalue()

    def to_dat(self) -> str:
        """Whitespace-separated table: load, then one success-rate column per algorithm."""
        algos = list(dict.fromkeys(r.algo for r in self.rows))
        table: dict[Fraction, dict[str, float]] = {}
        for r in self.rows:
            table.setdefault(r.load, {})[r.algo] = r.rate
        lines = ["# load " + " ".join(algos)]
        for load in sorted(table):
            vals = [f"{table[load][a]:.6f}" if a in table[load] else "nan" for a in algos]
            lines.append(f"{float(load):.6g} " + " ".join(vals))
        return "\n".join(lines) + "\n"

    def get(self, algo: str, n: int) -> ExperimentRow:
        for r in self.rows:
            if r.algo == algo and r.n == n:
                return r
        raise KeyError((algo, n))


def run_cell(config: ExperimentConfig, algo: str, n: int, delays: Optional[np.ndarray] = None) -> ExperimentRow:
    """All trials of one algorithm at one grid point."""
    P, tau = config.period, config.tau
    if delays is None:
        delays = instance_block(P, tau, n, config.trials, config.dist, config.master_seed)
    successes = errors = timeouts = invalid = 0
    spent = 0.0
    for t in range(config.trials):
        inst = Instance(P, tau, tuple(int(d) for d in delays[t]))
        seed = trial_seed(config.master_seed, algo, P, tau, n, t) if algo in RANDOMIZED else None
        start = time.perf_counter()
        try:
            res = run_solver(algo, inst, seed, time_limit=config.time_limit, **config.options)
        except Exception as exc:  # a crashing solver is a failed trial, not a crashed bench
            log.warning("%s crashed on %s: %s", algo, inst, exc)
            res = SolveResult("error", None, str(exc))
        spent += time.perf_counter() - start
        if res.status == SAT:
            if res.offsets is not None and is_valid(inst, res.offsets):
                successes += 1
            else:
                invalid += 1
        elif res.status == TIMEOUT:
            timeouts += 1
        elif res.status == "error":
            errors += 1
    flags = ";".join(f"{k}={v}" for k, v in (("invalid", invalid), ("timeouts", timeouts), ("errors", errors)) if v)
    mean_ms = 1000 * spent / config.trials if config.trials else 0.0
    return ExperimentRow(algo, P, tau, n, config.trials, successes, mean_ms, flags)


def _cell_job(args):
    config, algo, n = args
    return run_cell(config, algo, n)


def workers_from_env() -> int:
    try:
        return max(1, int(os.environ.get("PMA_WORKERS", "1")))
    except ValueError:
        return 1


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentReport:
    """Success counts for every (algorithm, n); rows ordered by algorithm then n."""
    if config.trials == 0:
        return ExperimentReport([])
    workers = workers_from_env() if workers is None else workers
    jobs = [(config, a, n) for a in config.algorithms for n in config.points()]
    if workers <= 1:
        blocks = {n: instance_block(config.period, config.tau, n, config.trials, config.dist, config.master_seed) for n in config.points()}
        rows = [run_cell(config, a, n, blocks[n]) for _, a, n in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_job, jobs))
    return ExperimentReport(rows)


# --- presets -------------------------------------------------------------------

LARGE = ("first-fit", "meta-offset", "compact-pair", "compact-fit", "greedy-uniform")
UNIT = ("first-fit", "greedy-uniform", "greedy-potential", "swap-and-move")


def _loads(step: float = 0.05) -> tuple[float, ...]:
    count = int(round(1 / step))
    return tuple(round(step * k, 10) for k in range(1, count + 1))


PRESETS: dict[str, dict] = {
    "fig6": dict(period=100_000, tau=1000, algorithms=LARGE, load_grid=_loads()),
    "fig7": dict(period=1000, tau=10, algorithms=LARGE, load_grid=_loads()),
    "fig8": dict(period=10_000, tau=1000, algorithms=LARGE + ("exact",), n_grid=tuple(range(1, 11)), time_limit=60.0),
    "fig9": dict(period=100_000, tau=1000, algorithms=LARGE, load_grid=_loads(), dist="small"),
    "fig11": dict(period=100, tau=1, algorithms=UNIT, load_grid=_loads()),
    "fig12": dict(period=10, tau=1, algorithms=UNIT + ("exact",), n_grid=tuple(range(1, 11)), time_limit=60.0),
}
TIMING_PRESET = dict(algorithms=UNIT, n_grid=(50, 100, 200, 400), trials=20)


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)} or fig13")
    return ExperimentConfig(**{**PRESETS[name], **overrides})


# --- timing ----------------------------------------------------------------------


@dataclass(frozen=True)
class TimingProfile:
    algo: str
    n_grid: tuple[int, ...]
    seconds: tuple[float, ...]
    slope: float
    warning: str = ""

    def to_csv(self) -> str:
        lines = ["algo,n,mean_ms"]
        lines += [f"{self.algo},{n},{1000 * s:.6f}" for n, s in zip(self.n_grid, self.seconds)]
        lines.append(f"# slope={self.slope:.4f}" + (f" warning={self.warning}" if self.warning else ""))
        return "\n".join(lines) + "\n"


def fit_slope(ns: Sequence[float], seconds: Sequence[float]) -> tuple[float, str]:
    """Least-squares slope of log(time) against log(n), with a warning for unusable timings."""
    ns = np.asarray(ns, dtype=float)
    ts = np.asarray(seconds, dtype=float)
    if len(ns) < 3:
        raise ValueError("timing fit needs at least three grid points")
    if np.any(ts <= 0):
        ts = np.maximum(ts, 1e-9)
        return float(np.polyfit(np.log(ns), np.log(ts), 1)[0]), "non-positive timings clamped"
    slope = float(np.polyfit(np.log(ns), np.log(ts), 1)[0])
    warning = "timings nearly constant" if ts.max() < 1.05 * ts.min() else ""
    return slope, warning


def timing_profile(algo, n_grid: Sequence[int], load: float = 1.0, trials: int = 10, seed: int = 0, tau: int = 1) -> TimingProfile:
    """Mean solve time per ``n`` on random instances of the given load, and the log-log slope.

    ``algo`` is a registered name or a callable taking an instance.
    """
    if len(n_grid) < 3:
        raise ValueError("timing_profile needs at least three grid points")
    if callable(algo):
        name, solve = getattr(algo, "__name__", "custom"), algo
    else:
        name = algo
        solve = lambda inst, s=None: run_solver(algo, inst, s)  # noqa: E731
    # warm up compiled kernels so compilation is not timed
    solve(Instance(8, tau, (0, 1, 2)))
    means = []
    rng = np.random.default_rng(seed)
    for n in n_grid:
        P = max(tau, int(round(n * tau / load)))
        insts = [Instance(P, tau, tuple(int(d) for d in rng.integers(0, P, n))) for _ in range(trials)]
        start = time.perf_counter()
        for k, inst in enumerate(insts):
            solve(inst) if callable(algo) else solve(inst, k)
        means.append((time.perf_counter() - start) / trials)
    slope, warning = fit_slope(n_grid, means)
    if warning:
        log.warning("timing profile of %s: %s", name, warning)
    return TimingProfile(name, tuple(n_grid), tuple(means), slope, warning)
