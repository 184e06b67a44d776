"""Problem model for periodic message assignment.

A message of size ``tau`` with delay ``d`` sent at offset ``o`` occupies the
slots ``o, ..., o + tau - 1`` of the first period and ``o + d, ..., o + d +
tau - 1`` of the second period, all taken modulo the period ``P``.  An
assignment is valid when no slot of either period is used twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

FREE = -1


@dataclass(frozen=True)
class Instance:
    """Period ``period``, message size ``tau`` and one delay per message.

    Delays are stored reduced modulo the period.
    """

    period: int
    tau: int
    delays: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.period) != self.period or int(self.tau) != self.tau:
            raise ValueError("period and tau must be integers")
        if self.tau < 1:
            raise ValueError(f"message size must be >= 1, got {self.tau}")
        if self.period < self.tau:
            raise ValueError(f"period {self.period} smaller than message size {self.tau}")
        delays = tuple(int(d) % self.period for d in self.delays)
        object.__setattr__(self, "period", int(self.period))
        object.__setattr__(self, "tau", int(self.tau))
        object.__setattr__(self, "delays", delays)

    @property
    def n(self) -> int:
        return len(self.delays)

    @property
    def load(self) -> Fraction:
        return load(self)

    def with_delays(self, delays: Iterable[int]) -> "Instance":
        return Instance(self.period, self.tau, tuple(delays))

    def to_dict(self) -> dict:
        return {"period": self.period, "tau": self.tau, "delays": list(self.delays)}

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        for key in ("period", "tau", "delays"):
            if key not in data:
                raise ValueError(f"instance document lacks field {key!r}")
        return cls(data["period"], data["tau"], tuple(data["delays"]))


def load(instance: Instance) -> Fraction:
    """Fraction of a period used by all messages at one contention point."""
    return Fraction(instance.n * instance.tau, instance.period)


def windows(instance: Instance, i: int, o: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Slots used by message ``i`` at offset ``o`` in the first and second period."""
    if not 0 <= i < instance.n:
        raise ValueError(f"message index {i} out of range for n={instance.n}")
    if not 0 <= o < instance.period:
        raise ValueError(f"offset {o} out of range [0, {instance.period})")
    P, tau = instance.period, instance.tau
    start2 = o + instance.delays[i]
    first = tuple((o + t) % P for t in range(tau))
    second = tuple((start2 + t) % P for t in range(tau))
    return first, second


@dataclass(frozen=True)
class Violation:
    """Two messages sharing a slot in period 1 or 2."""

    first: int
    second: int
    period: int

    def __str__(self):
        return f"messages {self.first} and {self.second} collide in period {self.period}"


def _check_offsets(instance: Instance, offsets: Sequence[int]) -> list[int]:
    if len(offsets) != instance.n:
        raise ValueError(f"expected {instance.n} offsets, got {len(offsets)}")
    out = []
    for o in offsets:
        if int(o) != o or not 0 <= o < instance.period:
            raise ValueError(f"offset {o!r} outside [0, {instance.period})")
        out.append(int(o))
    return out


def _circular_overlap(starts: list[tuple[int, int]], tau: int, P: int) -> Optional[tuple[int, int]]:
    # windows of equal length collide iff two cyclically consecutive starts are < tau apart
    if len(starts) < 2:
        return None
    starts.sort()
    for (s, i), (t, j) in zip(starts, starts[1:]):
        if t - s < tau:
            return i, j
    (s_last, i_last), (s_first, i_first) = starts[-1], starts[0]
    if s_first + P - s_last < tau:
        return i_last, i_first
    return None


def validate(instance: Instance, offsets: Sequence[int]) -> Optional[Violation]:
    """Return ``None`` if ``offsets`` is collision free, else one offending pair.

    Runs in O(n log n) whatever the message size, by comparing cyclically
    consecutive window starts.
    """
    offsets = _check_offsets(instance, offsets)
    P, tau = instance.period, instance.tau
    first = [(o, i) for i, o in enumerate(offsets)]
    hit = _circular_overlap(first, tau, P)
    if hit is not None:
        return Violation(min(hit), max(hit), 1)
    second = [((o + d) % P, i) for i, (o, d) in enumerate(zip(offsets, instance.delays))]
    hit = _circular_overlap(second, tau, P)
    if hit is not None:
        return Violation(min(hit), max(hit), 2)
    return None


def is_valid(instance: Instance, offsets: Sequence[int]) -> bool:
    return validate(instance, offsets) is None


@dataclass(frozen=True)
class Trace:
    """Slots used in the first and second period."""

    used1: frozenset
    used2: frozenset


def trace_of(instance: Instance, offsets: Sequence[Optional[int]]) -> Trace:
    used1, used2 = set(), set()
    for i, o in enumerate(offsets):
        if o is None or o < 0:
            continue
        w1, w2 = windows(instance, i, o)
        used1.update(w1)
        used2.update(w2)
    return Trace(frozenset(used1), frozenset(used2))


def _window_free(occ: np.ndarray, tau: int) -> np.ndarray:
    """``free[s]`` is true iff slots ``s .. s + tau - 1`` (cyclic) are all free."""
    used = (occ != FREE).astype(np.int64)
    if tau == 1:
        return used == 0
    P = len(occ)
    ext = np.concatenate([used, used[: tau - 1]])
    cs = np.concatenate([[0], np.cumsum(ext)])
    return (cs[tau : tau + P] - cs[:P]) == 0


class PartialAssignment:
    """Collision-free offsets for a subset of the messages of ``instance``.

    ``occ1`` and ``occ2`` hold, per slot, the index of the message using it
    (``FREE`` otherwise).  ``free1``/``free2`` cache which window starts are
    entirely free, so that offset queries are O(P) vector operations.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        P = instance.period
        self.offsets: list[Optional[int]] = [None] * instance.n
        self.occ1 = np.full(P, FREE, dtype=np.int64)
        self.occ2 = np.full(P, FREE, dtype=np.int64)
        self.free1 = np.ones(P, dtype=bool)
        self.free2 = np.ones(P, dtype=bool)
        self.size = 0

    @classmethod
    def from_offsets(cls, instance: Instance, offsets: Sequence[Optional[int]]) -> "PartialAssignment":
        pa = cls(instance)
        for i, o in enumerate(offsets):
            if o is not None and o >= 0:
                pa.place(i, int(o))
        return pa

    def copy(self) -> "PartialAssignment":
        other = PartialAssignment.__new__(PartialAssignment)
        other.instance = self.instance
        other.offsets = list(self.offsets)
        other.occ1 = self.occ1.copy()
        other.occ2 = self.occ2.copy()
        other.free1 = self.free1.copy()
        other.free2 = self.free2.copy()
        other.size = self.size
        return other

    def _slots(self, start: int) -> np.ndarray:
        return (start + np.arange(self.instance.tau)) % self.instance.period

    def _starts_touching(self, start: int) -> np.ndarray:
        tau, P = self.instance.tau, self.instance.period
        if 2 * tau - 1 >= P:
            return np.arange(P)
        return (start - tau + 1 + np.arange(2 * tau - 1)) % P

    def scheduled(self, i: int) -> bool:
        return self.offsets[i] is not None

    def fits(self, d: int, o: int) -> bool:
        """Whether a message of delay ``d`` can be added at offset ``o``."""
        P = self.instance.period
        return bool(self.free1[o % P] and self.free2[(o + d) % P])

    def place(self, i: int, o: int) -> None:
        if self.offsets[i] is not None:
            raise ValueError(f"message {i} is already scheduled")
        P = self.instance.period
        o %= P
        d = self.instance.delays[i]
        if not self.fits(d, o):
            s1, s2 = self._slots(o), self._slots(o + d)
            owners = [int(x) for x in self.occ1[s1] if x != FREE]
            period = 1
            if not owners:
                owners = [int(x) for x in self.occ2[s2] if x != FREE]
                period = 2
            raise ValueError(f"message {i} at offset {o} collides with {owners[0]} in period {period}")
        self.occ1[self._slots(o)] = i
        self.occ2[self._slots(o + d)] = i
        self.free1[self._starts_touching(o)] = False
        self.free2[self._starts_touching(o + d)] = False
        self.offsets[i] = o
        self.size += 1

    def remove(self, i: int) -> int:
        o = self.offsets[i]
        if o is None:
            raise ValueError(f"message {i} is not scheduled")
        d = self.instance.delays[i]
        self.occ1[self._slots(o)] = FREE
        self.occ2[self._slots(o + d)] = FREE
        self.free1 = _window_free(self.occ1, self.instance.tau)
        self.free2 = _window_free(self.occ2, self.instance.tau)
        self.offsets[i] = None
        self.size -= 1
        return o

    def available_mask(self, d: int) -> np.ndarray:
        """Boolean mask over offsets at which a delay-``d`` message fits."""
        P = self.instance.period
        return self.free1 & np.roll(self.free2, -(d % P))

    def available_offsets(self, d: int) -> np.ndarray:
        return np.flatnonzero(self.available_mask(d))

    def meta_mask(self, d: int) -> np.ndarray:
        """Fit mask restricted to meta-offsets ``k * tau`` for ``k < P // tau``."""
        P, tau = self.instance.period, self.instance.tau
        starts = np.arange(P // tau) * tau
        return self.free1[starts] & self.free2[(starts + d) % P]

    def unscheduled(self) -> list[int]:
        return [i for i, o in enumerate(self.offsets) if o is None]

    def complete(self) -> bool:
        return self.size == self.instance.n

    def assignment(self) -> tuple[int, ...]:
        if not self.complete():
            raise ValueError("partial assignment is not total")
        return tuple(int(o) for o in self.offsets)


def available_offsets(instance: Instance, partial: PartialAssignment, d: int) -> frozenset:
    """Offsets at which a message of delay ``d`` extends ``partial`` without collision."""
    if partial.instance is not instance and partial.instance != instance:
        raise ValueError("partial assignment belongs to another instance")
    return frozenset(int(o) for o in partial.available_offsets(d % instance.period))


def forbidden_count(partial: PartialAssignment, d: int) -> int:
    return partial.instance.period - int(partial.available_mask(d).sum())


def max_forbidden(partial: PartialAssignment) -> int:
    """Largest number of forbidden offsets over every possible delay."""
    return max(forbidden_count(partial, d) for d in range(partial.instance.period))
