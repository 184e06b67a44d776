"""Exhaustive backtracking solver and a search for unsatisfiable instances.

The search fixes message 0 at offset 0 (rotating every offset by a constant
preserves validity) and orders the offsets of messages with equal delays by
index.  It then repeatedly branches on the unscheduled message with the
fewest available offsets, trying offsets in increasing order.
Occupancy is kept as two integer bitmasks.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .core import Instance, is_valid

SAT, UNSAT, TIMEOUT = "sat", "unsat", "timeout"


@dataclass(frozen=True)
class ExactResult:
    status: str
    offsets: Optional[tuple[int, ...]]
    nodes: int
    time_limit: Optional[float]

    @property
    def sat(self) -> bool:
        return self.status == SAT


class _Budget(Exception):
    pass


def _window_masks(P: int, tau: int) -> list[int]:
    base = (1 << tau) - 1
    full = (1 << P) - 1
    return [((base << s) | (base >> (P - s))) & full for s in range(P)]


def _full_load_feasible(instance: Instance) -> bool:
    """Necessary condition at load 1.

    With no slack both periods are tiled, so the window starts of each period
    are ``c, c + tau, c + 2 tau, ...``.  Every delay is then the same value
    modulo ``tau`` and the delays sum to ``n`` times the shift between the
    two tilings, modulo ``P``.
    """
    n, P, tau = instance.n, instance.period, instance.tau
    if len({d % tau for d in instance.delays}) > 1:
        return False
    return sum(instance.delays) % P % n == 0


def exact_solve(instance: Instance, time_limit: Optional[float] = None, node_limit: Optional[int] = None) -> ExactResult:
    """Decide the instance; ``timeout`` when either limit trips first."""
    n, P, tau = instance.n, instance.period, instance.tau
    if n == 0:
        return ExactResult(SAT, (), 0, time_limit)
    if instance.load > 1:
        return ExactResult(UNSAT, None, 0, time_limit)
    if n * tau == P and not _full_load_feasible(instance):
        return ExactResult(UNSAT, None, 0, time_limit)
    win = _window_masks(P, tau)
    delays = instance.delays
    offsets: list[Optional[int]] = [None] * n
    deadline = None if time_limit is None else time.monotonic() + time_limit
    nodes = 0

    # messages sharing a delay are interchangeable: their offsets increase with the index
    prev: list[Optional[int]] = [None] * n
    last_of: dict[int, int] = {}
    for i, d in enumerate(delays):
        prev[i] = last_of.get(d)
        last_of[d] = i

    def options(i, used1, used2, low=0):
        d = delays[i]
        return [o for o in range(low, P) if not (used1 & win[o]) and not (used2 & win[(o + d) % P])]

    def dfs(used1, used2, left) -> bool:
        nonlocal nodes
        nodes += 1
        if node_limit is not None and nodes > node_limit:
            raise _Budget
        if deadline is not None and nodes % 512 == 0 and time.monotonic() > deadline:
            raise _Budget
        if not left:
            return True
        best, best_opts = None, None
        for i in left:
            p = prev[i]
            if p is not None and offsets[p] is None:
                if not options(i, used1, used2):
                    return False
                continue
            opts = options(i, used1, used2, 0 if p is None else offsets[p] + 1)
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = i, opts
                if not opts:
                    return False
        if bin(used1).count("1") + len(left) * tau == P:
            # no slack: the lowest free first-period slot starts the window of the
            # lowest remaining offset, so only the next message of each delay class can take it
            s = ((used1 + 1) & ~used1).bit_length() - 1
            takers = []
            for i in left:
                p = prev[i]
                if p is not None and (offsets[p] is None or offsets[p] >= s):
                    continue
                if not (used2 & win[(s + delays[i]) % P]) and not (used1 & win[s]):
                    takers.append(i)
            if len(takers) < len(best_opts):
                for i in takers:
                    offsets[i] = s
                    if dfs(used1 | win[s], used2 | win[(s + delays[i]) % P], [j for j in left if j != i]):
                        return True
                    offsets[i] = None
                return False
        rest = [i for i in left if i != best]
        d = delays[best]
        for o in best_opts:
            offsets[best] = o
            if dfs(used1 | win[o], used2 | win[(o + d) % P], rest):
                return True
        offsets[best] = None
        return False

    offsets[0] = 0
    try:
        found = dfs(win[0], win[delays[0] % P], list(range(1, n)))
    except _Budget:
        return ExactResult(TIMEOUT, None, nodes, time_limit)
    if not found:
        return ExactResult(UNSAT, None, nodes, time_limit)
    result = tuple(int(o) for o in offsets)
    if not is_valid(instance, result):  # pragma: no cover - search only adds non-colliding messages
        raise RuntimeError("exact search produced a colliding assignment")
    return ExactResult(SAT, result, nodes, time_limit)


# --- unsat search -----------------------------------------------------------


def canonical_delay_sets(P: int, n: int) -> Iterable[tuple[int, ...]]:
    """Sorted delay multisets whose smallest delay is 0.

    Adding a constant to every delay only rotates the second period, so these
    cover all instances up to that symmetry and message relabeling.
    """
    if n == 0:
        yield ()
        return
    for rest in itertools.combinations_with_replacement(range(P), n - 1):
        yield (0,) + rest


def count_canonical(P: int, n: int) -> int:
    return 1 if n == 0 else math.comb(P + n - 2, n - 1)


def _sampled_sets(P: int, n: int, count: int, rng: np.random.Generator) -> Iterable[tuple[int, ...]]:
    for _ in range(count):
        rest = sorted(int(x) for x in rng.integers(0, P, n - 1))
        yield (0,) + tuple(rest)


def delay_sets(P: int, n: int, cap: int, rng: np.random.Generator) -> Iterable[tuple[int, ...]]:
    """All canonical multisets when there are at most ``cap``, otherwise ``cap`` random ones."""
    if count_canonical(P, n) <= cap:
        return canonical_delay_sets(P, n)
    return _sampled_sets(P, n, cap, rng)


@dataclass(frozen=True)
class UnsatWitness:
    instance: Instance
    result: ExactResult
    tried: int


def search_unsat(
    periods: Iterable[int],
    tau: int,
    target_load,
    budget: int,
    seed: int = 0,
    time_limit: Optional[float] = None,
    solve_time_limit: Optional[float] = 10.0,
) -> Optional[UnsatWitness]:
    """First instance at exactly ``target_load`` that the exact solver proves unsatisfiable.

    ``budget`` caps the number of solver calls over all periods; ``None`` is
    returned when it runs out (which says nothing about existence).
    """
    target = Fraction(target_load).limit_denominator(10_000)
    rng = np.random.default_rng(seed)
    deadline = None if time_limit is None else time.monotonic() + time_limit
    tried = 0
    for P in periods:
        if P < tau:
            continue
        n_frac = target * P / tau
        if n_frac.denominator != 1:
            continue
        n = int(n_frac)
        for delays in delay_sets(P, n, budget - tried, rng):
            if tried >= budget or (deadline is not None and time.monotonic() > deadline):
                return None
            tried += 1
            inst = Instance(P, tau, delays)
            res = exact_solve(inst, time_limit=solve_time_limit)
            if res.status == UNSAT:
                return UnsatWitness(inst, res, tried)
    return None
