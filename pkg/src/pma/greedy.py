"""First Fit and Meta-Offset.

Both work on the interval representation: every scheduled message forbids,
for a new message of delay ``d``, two cyclic intervals of ``2 tau - 1``
offsets (one per period).  The smallest offset outside all of them is found
by a sweep, so a run costs O(n^2 log n) whatever the period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import Instance


@dataclass(frozen=True)
class GreedyOutcome:
    """Result of a heuristic run.

    ``offsets`` is set only on success.  ``partial`` always holds the offsets
    reached (``None`` for unscheduled messages) and ``failed`` the first
    message that could not be scheduled.
    """

    offsets: Optional[tuple[int, ...]]
    scheduled_count: int
    failed: Optional[int] = None
    partial: tuple[Optional[int], ...] = ()

    @property
    def success(self) -> bool:
        return self.offsets is not None

    @classmethod
    def from_partial(cls, partial: Sequence[Optional[int]], failed: Optional[int] = None) -> "GreedyOutcome":
        partial = tuple(None if o is None else int(o) for o in partial)
        count = sum(o is not None for o in partial)
        if count == len(partial):
            return cls(partial, count, None, partial)
        return cls(None, count, failed, partial)


def forbidden_intervals(P: int, tau: int, placed: Sequence[tuple[int, int]], d: int) -> list[tuple[int, int]]:
    """Half-open offset intervals within ``[0, P)`` forbidden for delay ``d``.

    ``placed`` holds ``(offset, delay)`` of the scheduled messages.
    """
    width = 2 * tau - 1
    if width >= P and placed:
        return [(0, P)]
    out = []
    for o, dj in placed:
        for a in (o - tau + 1, o + dj - d - tau + 1):
            a %= P
            b = a + width
            if b <= P:
                out.append((a, b))
            else:
                out.append((a, P))
                out.append((0, b - P))
    return out


def first_free(intervals: list[tuple[int, int]], limit: int, step: int = 1) -> Optional[int]:
    """Smallest multiple of ``step`` in ``[0, limit)`` outside every interval."""
    cur = 0
    for a, b in sorted(intervals):
        if a > cur:
            break
        if b > cur:
            cur = -(-b // step) * step
    return cur if cur < limit else None


def _greedy(instance: Instance, step: int, limit: int) -> GreedyOutcome:
    P, tau = instance.period, instance.tau
    placed: list[tuple[int, int]] = []
    offsets: list[Optional[int]] = [None] * instance.n
    for i, d in enumerate(instance.delays):
        o = first_free(forbidden_intervals(P, tau, placed, d), limit, step)
        if o is None:
            return GreedyOutcome.from_partial(offsets, failed=i)
        offsets[i] = o
        placed.append((o, d))
    return GreedyOutcome.from_partial(offsets)


def first_fit(instance: Instance) -> GreedyOutcome:
    """Schedule messages in input order at their smallest collision-free offset."""
    return _greedy(instance, 1, instance.period)


def meta_offset(instance: Instance) -> GreedyOutcome:
    """First Fit restricted to offsets ``k * tau`` with ``k < P // tau``.

    Aligned first-period windows never overlap, so only the second period can
    block a meta-offset.
    """
    tau = instance.tau
    return _greedy(instance, tau, (instance.period // tau) * tau)
