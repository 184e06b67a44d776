"""Compact tuples: Compact Pair, Compact k-Tuples, Compact Fit and the load bound table.

All algorithms here use meta-offsets and require ``tau`` to divide the
period (see :func:`pma.reductions.normalize_period`).  Write
``d = quot * tau + rem``.  Messages ``i`` then ``j`` (with ``rem_i <=
rem_j``) are chained when ``A(i) + (quot_i + 1) tau = A(j) + quot_j tau``,
which places ``j`` less than ``tau`` slots after ``i`` in the second period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Instance, PartialAssignment
from .greedy import GreedyOutcome


@dataclass(frozen=True)
class SplitDelay:
    msg: int
    quot: int
    rem: int


def split_delays(instance: Instance) -> list[SplitDelay]:
    """Euclidean division of every delay by ``tau``, sorted by remainder (stable)."""
    tau = instance.tau
    splits = [SplitDelay(i, d // tau, d % tau) for i, d in enumerate(instance.delays)]
    return sorted(splits, key=lambda s: (s.rem, s.msg))


def gap(a: SplitDelay, b: SplitDelay, m: int) -> int:
    """Meta-offset distance from ``a`` to ``b`` when chained; zero means not compactible."""
    return (a.quot + 1 - b.quot) % m


@dataclass(frozen=True)
class CompactTuple:
    """Messages in chain order and their meta-offsets relative to the first one."""

    members: tuple[int, ...]
    rel: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.members)


def _require_multiple(instance: Instance) -> int:
    if instance.period % instance.tau:
        raise ValueError(
            f"tau={instance.tau} does not divide P={instance.period}; apply reductions.normalize_period first"
        )
    return instance.period // instance.tau


def _fits_span(length: int, first: SplitDelay, last: SplitDelay, m: int, tau: int) -> bool:
    # second-period windows of a chain sit on consecutive meta slots; they must not wrap onto the first
    return length * tau + (last.rem - first.rem) <= m * tau


def _extends(chain: Sequence[SplitDelay], rel: Sequence[int], x: SplitDelay, m: int, tau: int) -> Optional[int]:
    r = (rel[-1] + gap(chain[-1], x, m)) % m
    if r in rel or not _fits_span(len(chain) + 1, chain[0], x, m, tau):
        return None
    return r


def _chain_rel(chain: Sequence[SplitDelay], m: int) -> list[int]:
    rel = [0]
    for a, b in zip(chain, chain[1:]):
        rel.append((rel[-1] + gap(a, b, m)) % m)
    return rel


def find_compact_pair(splits: Sequence[SplitDelay], m: int, tau: int = 1) -> Optional[CompactTuple]:
    """Pick a compact pair among three messages sorted by remainder.

    Tries first-second, then first-third; otherwise the last two share their
    quotient and chain with gap 1.
    """
    if len(splits) != 3:
        raise ValueError("find_compact_pair expects exactly three messages")
    a, b, c = splits
    for x, y in ((a, b), (a, c), (b, c)):
        g = gap(x, y, m)
        if g and _fits_span(2, x, y, m, tau):
            return CompactTuple((x.msg, y.msg), (0, g))
    return None


def _find_tuple_positions(pool: Sequence[SplitDelay], k: int, m: int, tau: int) -> Optional[list[int]]:
    if k < 1 or len(pool) < k:
        return None
    chain = [0]
    for size in range(2, k + 1):
        members = [pool[p] for p in chain]
        rel = _chain_rel(members, m)
        by_quot: dict[int, list[int]] = {}
        found = None
        for p in range(chain[-1] + 1, len(pool)):
            x = pool[p]
            if _extends(members, rel, x, m, tau) is not None:
                found = chain + [p]
                break
            group = by_quot.setdefault(x.quot, [])
            group.append(p)
            if len(group) == size and _fits_span(size, pool[group[0]], x, m, tau) and size <= m:
                found = list(group)
                break
        if found is None:
            return None
        chain = found
    return chain


def find_compact_tuple(splits: Sequence[SplitDelay], k: int, m: int, tau: int = 1) -> Optional[CompactTuple]:
    """Build a compact ``k``-tuple from messages sorted by remainder.

    Grows a chain one message at a time: the next message that extends it is
    appended, unless ``size`` messages with equal quotient show up first, in
    which case they replace the chain.  Succeeds whenever at least
    ``tuple_supply(k)`` messages are given; returns ``None`` if the pool runs
    out first.
    """
    pos = _find_tuple_positions(splits, k, m, tau)
    if pos is None:
        return None
    chain = [splits[p] for p in pos]
    return CompactTuple(tuple(s.msg for s in chain), tuple(_chain_rel(chain, m)))


def tuple_supply(k: int) -> int:
    """Pool size that always contains a compact ``k``-tuple."""
    return k + k * (k - 1) * (2 * k - 1) // 6


def _place_tuple(pa: PartialAssignment, tup: CompactTuple, m: int) -> bool:
    P, tau = pa.instance.period, pa.instance.tau
    base = np.arange(m)
    ok = np.ones(m, dtype=bool)
    for msg, r in zip(tup.members, tup.rel):
        starts = ((base + r) % m) * tau
        ok &= pa.free1[starts] & pa.free2[(starts + pa.instance.delays[msg]) % P]
        if not ok.any():
            return False
    b = int(np.argmax(ok))
    for msg, r in zip(tup.members, tup.rel):
        pa.place(msg, ((b + r) % m) * tau)
    return True


def _meta_phase(pa: PartialAssignment, order: Iterable[int]) -> Optional[int]:
    tau = pa.instance.tau
    for i in order:
        if pa.scheduled(i):
            continue
        mask = pa.meta_mask(pa.instance.delays[i])
        if not mask.any():
            return i
        pa.place(i, int(np.argmax(mask)) * tau)
    return None


def _tuple_phase(pa: PartialAssignment, splits: Sequence[SplitDelay], arity: int, m: int, finder) -> None:
    pool = [s for s in splits if not pa.scheduled(s.msg)]
    while pool:
        pos = finder(pool, arity)
        if pos is None:
            return
        chain = [pool[p] for p in pos]
        tup = CompactTuple(tuple(s.msg for s in chain), tuple(_chain_rel(chain, m)))
        if not _place_tuple(pa, tup, m):
            return
        # skipped messages before the last member are left to later phases
        pool = pool[pos[-1] + 1 :]


def _pair_positions(pool: Sequence[SplitDelay], m: int, tau: int) -> Optional[list[int]]:
    if len(pool) < 2:
        return None
    if len(pool) == 2:
        a, b = pool
        return [0, 1] if gap(a, b, m) and _fits_span(2, a, b, m, tau) else None
    pair = find_compact_pair(pool[:3], m, tau)
    if pair is None:
        return None
    index = {s.msg: p for p, s in enumerate(pool[:3])}
    return [index[x] for x in pair.members]


def _finish(pa: PartialAssignment) -> GreedyOutcome:
    failed = _meta_phase(pa, range(pa.instance.n))
    return GreedyOutcome.from_partial(pa.offsets, failed)


def compact_pair_solve(instance: Instance) -> GreedyOutcome:
    """Schedule compact pairs (found three messages at a time) then the rest by Meta-Offset."""
    m = _require_multiple(instance)
    pa = PartialAssignment(instance)
    splits = split_delays(instance)
    _tuple_phase(pa, splits, 2, m, lambda pool, _: _pair_positions(pool, m, instance.tau))
    return _finish(pa)


def compact_pairs_of_class(instance: Instance, members: Sequence[int]) -> GreedyOutcome:
    """Compact pairs drawn from ``members`` only, then by Meta-Offset the unpaired members and the others."""
    m = _require_multiple(instance)
    pa = PartialAssignment(instance)
    keep = set(members)
    splits = [s for s in split_delays(instance) if s.msg in keep]
    _tuple_phase(pa, splits, 2, m, lambda pool, _: _pair_positions(pool, m, instance.tau))
    order = [i for i in range(instance.n) if i in keep] + [i for i in range(instance.n) if i not in keep]
    failed = _meta_phase(pa, order)
    return GreedyOutcome.from_partial(pa.offsets, failed)


def compact_k_tuples_solve(instance: Instance, k: int) -> GreedyOutcome:
    """Schedule compact ``k``-tuples while possible, then ``k-1``-tuples, down to single messages."""
    if k < 1:
        raise ValueError(f"tuple arity must be >= 1, got {k}")
    m = _require_multiple(instance)
    pa = PartialAssignment(instance)
    splits = split_delays(instance)
    for arity in range(k, 1, -1):
        _tuple_phase(pa, splits, arity, m, lambda pool, a: _find_tuple_positions(pool, a, m, instance.tau))
    return _finish(pa)


def compact_fit(instance: Instance) -> GreedyOutcome:
    """Greedy on meta-offsets in remainder order, preferring to extend a compact tuple.

    A meta-offset extends a tuple when the meta-offset just before it would
    collide in the second period.  Otherwise the smallest free meta-offset is
    used.
    """
    m = _require_multiple(instance)
    P, tau = instance.period, instance.tau
    pa = PartialAssignment(instance)
    starts = np.arange(m) * tau
    for s in split_delays(instance):
        d = instance.delays[s.msg]
        ok = pa.free1[starts] & pa.free2[(starts + d) % P]
        if not ok.any():
            return GreedyOutcome.from_partial(pa.offsets, s.msg)
        touching = ok & ~pa.free2[(starts - tau + d) % P]
        pick = touching if touching.any() else ok
        pa.place(s.msg, int(np.argmax(pick)) * tau)
    return GreedyOutcome.from_partial(pa.offsets)


# --- load bound table -------------------------------------------------------


def tuple_cost(j: int, i: int) -> int:
    """Meta-offsets a scheduled ``j``-tuple forbids to a new ``i``-tuple (i >= 2)."""
    # j*i in the first period, j + i in the second (tuples built in remainder order)
    return j * i + j + i


def single_cost(j: int) -> int:
    """Meta-offsets a scheduled ``j``-tuple forbids to a single message."""
    return 2 * j + 1


def default_load_grid() -> list[Fraction]:
    """Fractions with denominator at most 10, plus hundredths."""
    grid = {Fraction(p, q) for q in range(1, 11) for p in range(1, q + 1)}
    grid |= {Fraction(p, 100) for p in range(1, 101)}
    return sorted(grid)


@dataclass(frozen=True)
class BoundTable:
    """Guaranteed tuple counts per arity, as fractions of ``m = P / tau``.

    ``asymptotic_load`` is the exact threshold of the recurrence for large
    ``m``; ``guaranteed_load`` is the largest grid load not above it, and
    ``min_n`` the smallest message count from which the finite-``n`` check
    (tuple supply included) holds at that load.
    """

    k: int
    n: dict[int, Fraction]
    guaranteed_load: Fraction
    asymptotic_load: Fraction
    min_n: int
    counts: dict[int, int] = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["i,n_i"]
        lines += [f"{i},{self.n[i]}" for i in sorted(self.n, reverse=True)]
        lines.append("guaranteed_load,min_n")
        lines.append(f"{self.guaranteed_load},{self.min_n}")
        return "\n".join(lines) + "\n"


def _fractional_counts(k: int) -> dict[int, Fraction]:
    nu: dict[int, Fraction] = {}
    for i in range(k, 1, -1):
        used = sum((nu[j] * tuple_cost(j, i) for j in nu), Fraction(0))
        nu[i] = max(Fraction(0), (1 - used) / tuple_cost(i, i))
    used = sum((nu[j] * single_cost(j) for j in nu), Fraction(0))
    nu[1] = max(Fraction(0), (1 - used) / 3)
    return nu


def finite_counts(k: int, n: int, m: int) -> Optional[dict[int, int]]:
    """Tuple counts guaranteed for ``n`` messages and ``m`` meta-offsets, or ``None`` if the bound fails.

    Phase ``i`` places i-tuples while the forbidden meta-offset count stays
    below ``m``; it needs ``n - sum_{j >= i} j n_j >= tuple_supply(i)``
    messages left for the tuples to exist.  Single messages must then all fit.
    """
    counts: dict[int, int] = {}
    used_msgs = 0
    for i in range(k, 1, -1):
        used = sum(counts[j] * tuple_cost(j, i) for j in counts)
        cap = -(-(m - used) // tuple_cost(i, i)) if m > used else 0
        counts[i] = cap
        used_msgs += i * cap
        if cap and n - used_msgs < tuple_supply(i):
            return None
    rest = n - used_msgs
    if rest < 0:
        return None
    base = sum(counts[j] * single_cost(j) for j in counts)
    if rest and base + 3 * (rest - 1) >= m:
        return None
    counts[1] = rest
    return counts


def bound_table(k: int, load_grid: Optional[Sequence[Fraction]] = None, horizon: int = 2000) -> BoundTable:
    """Lower bounds on scheduled tuples and the load Compact k-Tuples always handles."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    nu = _fractional_counts(k)
    lam = sum((i * v for i, v in nu.items()), Fraction(0))
    grid = sorted(Fraction(x) for x in (load_grid if load_grid is not None else default_load_grid()))
    below = [x for x in grid if x <= lam]
    guaranteed = below[-1] if below else Fraction(0)
    min_n = horizon + 1
    counts: dict[int, int] = {}
    if guaranteed > 0:
        for n in range(horizon, 0, -1):
            m = math.floor(n / guaranteed) + 1  # smallest m with n / m < guaranteed
            got = finite_counts(k, n, m)
            if got is None:
                break
            min_n, counts = n, got
    return BoundTable(k, nu, guaranteed, lam, min_n, counts)
