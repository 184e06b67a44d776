"""Messages of size one: potentials, Swap, Swap and Move, Greedy Potential, Greedy Uniform.

For ``tau = 1`` the potential of a message of delay ``d`` counts the first
period slots ``p`` in use whose partner ``p + d`` is also in use in the second
period.  A message of potential ``v`` has ``P - 2s + v`` available offsets when
``s`` messages are scheduled, so raising potentials frees offsets.
"""

from __future__ import annotations

from math import comb
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .core import FREE, Instance, PartialAssignment
from .greedy import GreedyOutcome


def _require_unit(instance: Instance, what: str) -> None:
    if instance.tau != 1:
        raise ValueError(f"{what} needs messages of size 1, got tau={instance.tau}")


def _delays(instance: Instance) -> np.ndarray:
    return np.asarray(instance.delays, dtype=np.int64).reshape(-1)


def _outcome(offsets: np.ndarray, failed: int = -1) -> GreedyOutcome:
    partial = [None if o < 0 else int(o) for o in offsets]
    first_missing = next((i for i, o in enumerate(partial) if o is None), None)
    if failed < 0:
        failed = first_missing
    return GreedyOutcome.from_partial(partial, failed)


# --- potentials -----------------------------------------------------------------


def message_potential(partial: PartialAssignment, d: int) -> int:
    """Number of used first-period slots ``p`` with ``p + d`` used in the second period."""
    _require_unit(partial.instance, "message_potential")
    P = partial.instance.period
    used1 = partial.occ1 != FREE
    used2 = partial.occ2 != FREE
    return int(np.count_nonzero(used1 & np.roll(used2, -(d % P))))


def position_potentials(partial: PartialAssignment) -> np.ndarray:
    """``out[p]`` counts messages ``j`` whose slot ``p + d_j`` is used in the second period."""
    _require_unit(partial.instance, "position_potentials")
    P = partial.instance.period
    used2 = (partial.occ2 != FREE).astype(np.int64)
    out = np.zeros(P, dtype=np.int64)
    for d in partial.instance.delays:
        out += np.roll(used2, -d)
    return out


class PotentialState:
    """A partial assignment with incrementally maintained potentials.

    ``observer`` (if given) is called with the state after every placement or
    removal, which is how the invariant checks hook into Swap and Move.
    """

    def __init__(self, instance: Instance, observer: Optional[Callable[["PotentialState"], None]] = None):
        _require_unit(instance, "PotentialState")
        self.instance = instance
        self.partial = PartialAssignment(instance)
        self.msg_potential = np.zeros(instance.n, dtype=np.int64)
        self.pos_potential = np.zeros(instance.period, dtype=np.int64)
        self.total = 0
        self.observer = observer
        self._delays = _delays(instance)

    @classmethod
    def from_partial(cls, partial: PartialAssignment) -> "PotentialState":
        state = cls(partial.instance)
        for i, o in enumerate(partial.offsets):
            if o is not None:
                state.place(i, o)
        return state

    def _notify(self):
        if self.observer is not None:
            self.observer(self)

    def _used1(self, p) -> np.ndarray:
        return self.partial.occ1[p % self.instance.period] != FREE

    def _used2(self, p) -> np.ndarray:
        return self.partial.occ2[p % self.instance.period] != FREE

    def _gain(self, o: int, q: int, sign: int) -> None:
        # first-period slot o and second-period slot q change together; the
        # pair (o, q) itself is counted once, on the occ1 side
        d = self._delays
        delta = self._used2(o + d).astype(np.int64) + self._used1(q - d)
        delta += (q - o - d) % self.instance.period == 0
        self.msg_potential += sign * delta
        self.total += sign * int(delta.sum())
        np.add.at(self.pos_potential, (q - d) % self.instance.period, sign)

    def place(self, i: int, o: int) -> None:
        o %= self.instance.period
        q = (o + self.instance.delays[i]) % self.instance.period
        self.partial.place(i, o)
        # exclude the new pair from the occupancy lookups before counting it once
        self.partial.occ1[o] = FREE
        self.partial.occ2[q] = FREE
        self._gain(o, q, +1)
        self.partial.occ1[o] = i
        self.partial.occ2[q] = i
        self._notify()

    def remove(self, i: int) -> int:
        o = self.partial.remove(i)
        q = (o + self.instance.delays[i]) % self.instance.period
        self._gain(o, q, -1)
        self._notify()
        return o

    def offset(self, i: int) -> Optional[int]:
        return self.partial.offsets[i]

    def available_count(self, d: int) -> int:
        return int(np.count_nonzero(self.partial.available_mask(d)))

    def swap_target(self, i: int, o: int) -> int:
        """The message evicted by ``swap(i, o)``; raises if the swap is not allowed."""
        P = self.instance.period
        if self.partial.offsets[i] is not None:
            raise ValueError(f"message {i} is already scheduled")
        if not 0 <= o < P:
            raise ValueError(f"offset {o} out of range [0, {P})")
        if self.partial.occ1[o] != FREE:
            raise ValueError(f"slot {o} of the first period is in use")
        j = int(self.partial.occ2[(o + self.instance.delays[i]) % P])
        if j == FREE:
            raise ValueError(f"slot {(o + self.instance.delays[i]) % P} of the second period is free, nothing to swap")
        return j

    def swap_delta(self, i: int, o: int) -> int:
        j = self.swap_target(i, o)
        return int(self.pos_potential[o] - self.pos_potential[self.partial.offsets[j]])

    def recomputed(self) -> tuple[np.ndarray, np.ndarray, int]:
        """Potentials computed from scratch: ``(msg, pos, total)``."""
        msg = np.array([message_potential(self.partial, d) for d in self.instance.delays], dtype=np.int64)
        pos = position_potentials(self.partial)
        return msg, pos, int(msg.sum())

    def invariant_errors(self) -> list[str]:
        """Human-readable descriptions of every violated potential identity."""
        errors = []
        n, P, k = self.instance.n, self.instance.period, self.partial.size
        msg, pos, total = self.recomputed()
        if not np.array_equal(msg, self.msg_potential):
            errors.append("message potentials drifted from recomputation")
        if not np.array_equal(pos, self.pos_potential):
            errors.append("position potentials drifted from recomputation")
        if total != self.total:
            errors.append(f"total {self.total} != recomputed {total}")
        if int(self.pos_potential.sum()) != n * k:
            errors.append(f"position potentials sum to {int(self.pos_potential.sum())}, expected {n * k}")
        used1 = self.partial.occ1 != FREE
        if int(self.pos_potential[used1].sum()) != int(self.msg_potential.sum()):
            errors.append("message-side and position-side totals differ")
        for d in set(self.instance.delays):
            v = int(np.count_nonzero(used1 & np.roll(self.partial.occ2 != FREE, -d)))
            if self.available_count(d) != P - 2 * k + v:
                errors.append(f"delay {d}: {self.available_count(d)} available offsets, expected {P - 2 * k + v}")
        return errors


def swap(state: PotentialState, i: int, o: int) -> int:
    """Evict the second-period owner of ``o + d_i`` and put ``i`` at ``o``; returns the evicted message.

    The second-period occupancy is unchanged, hence so are the position
    potentials, and the total changes by ``pos[o] - pos[A(j)]``.
    """
    j = state.swap_target(i, o)
    state.remove(j)
    state.place(i, o)
    return j


# --- Swap and Move -----------------------------------------------------------


def _first_free(state: PotentialState, d: int, start: int = 0) -> Optional[int]:
    mask = state.partial.available_mask(d)
    hits = np.flatnonzero(mask[start:])
    return int(hits[0]) + start if hits.size else None


def _ff_pass(state: PotentialState) -> None:
    for i in range(state.instance.n):
        if state.offset(i) is None:
            o = _first_free(state, state.instance.delays[i])
            if o is not None:
                state.place(i, o)


def _best_swap(state: PotentialState, i: int) -> Optional[int]:
    best_o, best_delta = None, 0
    for o in np.flatnonzero(state.partial.occ1 == FREE):
        delta = state.swap_delta(i, int(o))
        if delta > best_delta:
            best_o, best_delta = int(o), delta
    return best_o


def _try_move(state: PotentialState, i: int) -> bool:
    P = state.instance.period
    d = state.instance.delays[i]
    occ1, occ2 = state.partial.occ1, state.partial.occ2
    for o in range(P):
        blockers = []
        for b in (int(occ1[o]), int(occ2[(o + d) % P])):
            if b != FREE and b not in blockers:
                blockers.append(b)
        if not blockers:
            continue
        old = [state.offset(b) for b in blockers]
        for b in blockers:
            state.remove(b)
        state.place(i, o)
        first = blockers[0]
        o1 = _first_free(state, state.instance.delays[first])
        while o1 is not None:
            state.place(first, o1)
            if len(blockers) == 1:
                return True
            o2 = _first_free(state, state.instance.delays[blockers[1]])
            if o2 is not None:
                state.place(blockers[1], o2)
                return True
            state.remove(first)
            o1 = _first_free(state, state.instance.delays[first], o1 + 1)
        state.remove(i)
        for b, ob in zip(blockers, old):
            state.place(b, ob)
    return False


def swap_and_move_reference(instance: Instance, observer=None) -> tuple[GreedyOutcome, int, int]:
    """Plain-Python Swap and Move; returns ``(outcome, swaps, moves)``.

    Same decisions as the compiled :func:`swap_and_move`, but every step goes
    through :class:`PotentialState` so ``observer`` sees each mutation.
    """
    state = PotentialState(instance, observer)
    swaps = moves = 0
    _ff_pass(state)
    while True:
        pending = state.partial.unscheduled()
        if not pending:
            break
        blocked = pending[0]
        o = _best_swap(state, blocked)
        if o is not None:
            swap(state, blocked, o)
            swaps += 1
            _ff_pass(state)
            continue
        if not any(_try_move(state, i) for i in pending):
            break
        moves += 1
        _ff_pass(state)
    offsets = np.array([-1 if o is None else o for o in state.partial.offsets], dtype=np.int64)
    return _outcome(offsets), swaps, moves


def swap_and_move(instance: Instance) -> GreedyOutcome:
    """First Fit, then potential-increasing swaps, then moves of at most two messages.

    Swaps target the lowest-index unscheduled message and take the largest
    potential gain (smallest offset on ties).  When no swap helps, each
    unscheduled message in turn tries every offset, evicting its one or two
    blockers and re-placing them at their smallest available offsets.
    """
    _require_unit(instance, "swap_and_move")
    offsets, _, _ = _kernels.swap_and_move(_delays(instance), instance.period)
    return _outcome(offsets)


def swap_and_move_stats(instance: Instance) -> tuple[GreedyOutcome, int, int]:
    _require_unit(instance, "swap_and_move")
    offsets, swaps, moves = _kernels.swap_and_move(_delays(instance), instance.period)
    return _outcome(offsets), int(swaps), int(moves)


# --- greedy variants -------------------------------------------------------


def greedy_potential(instance: Instance) -> GreedyOutcome:
    """Input-order greedy choosing the available offset that maximizes the potential of later messages."""
    _require_unit(instance, "greedy_potential")
    offsets, failed = _kernels.greedy_potential(_delays(instance), instance.period)
    return _outcome(offsets, int(failed))


def greedy_uniform(instance: Instance, seed=None) -> GreedyOutcome:
    """Input-order greedy picking an available offset uniformly at random.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    draws = np.random.default_rng(seed).random(instance.n)
    offsets, failed = _kernels.greedy_uniform(_delays(instance), instance.period, instance.tau, draws)
    return _outcome(offsets, int(failed))


# --- success probability of Greedy Uniform ------------------------------------------


def step_failure(m: int, s: int) -> Fraction:
    """Probability that a random message finds no offset after ``s`` uniform placements in period ``m``.

    The ``m - s`` free first-period slots, shifted by the delay, must all land
    in the ``s`` used second-period slots.
    """
    lower = 2 * s - m
    if lower < 0:
        return Fraction(0)
    return Fraction(comb(s, lower), comb(m, s))


def success_probability_exact(m: int, n: int) -> Fraction:
    if m < 1:
        raise ValueError(f"period must be positive, got {m}")
    if not 0 <= n <= m:
        raise ValueError(f"need 0 <= n <= m, got n={n}, m={m}")
    prob = Fraction(1)
    for s in range(n):
        prob *= 1 - step_failure(m, s)
    return prob


def success_probability(m: int, n: int) -> float:
    """Chance that Greedy Uniform schedules ``n`` random size-1 messages in period ``m``.

    Product of per-step success chances computed as if every trace of a
    given size were equally likely.  Choosing uniformly among the available
    offsets does not make traces exactly equiprobable, so this is a close
    approximation (5/6 against an exact 41/48 at m=4, n=3; within 2 points
    at m=100).
    """
    return float(success_probability_exact(m, n))
