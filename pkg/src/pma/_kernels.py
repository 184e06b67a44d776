"""Compiled inner loops.

Each kernel has a pure-Python counterpart elsewhere in the package that the
test suite compares it against.  Offsets use -1 for "unscheduled" and the
occupancy arrays hold the owning message index (-1 when free).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _block(free, start, tau, P):
    # window starts whose tau slots meet slot range [start, start + tau)
    if 2 * tau - 1 >= P:
        free[:] = False
        return
    for t in range(-tau + 1, tau):
        free[(start + t) % P] = False


@njit(cache=True)
def greedy_scan(delays, P, tau, step, limit):
    """Smallest-offset greedy over offsets ``0, step, 2 step, ... < limit``.

    Returns ``(offsets, failed)`` with ``failed = -1`` on success.
    """
    n = delays.shape[0]
    free1 = np.ones(P, dtype=np.bool_)
    free2 = np.ones(P, dtype=np.bool_)
    offsets = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        d = delays[i]
        found = -1
        for o in range(0, limit, step):
            if free1[o] and free2[(o + d) % P]:
                found = o
                break
        if found < 0:
            return offsets, i
        offsets[i] = found
        _block(free1, found, tau, P)
        _block(free2, (found + d) % P, tau, P)
    return offsets, -1


@njit(cache=True)
def greedy_uniform(delays, P, tau, draws):
    """Uniform choice among available offsets; ``draws[i]`` in [0, 1) picks for message ``i``."""
    n = delays.shape[0]
    free1 = np.ones(P, dtype=np.bool_)
    free2 = np.ones(P, dtype=np.bool_)
    offsets = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        d = delays[i]
        count = 0
        for o in range(P):
            if free1[o] and free2[(o + d) % P]:
                count += 1
        if count == 0:
            return offsets, i
        target = int(draws[i] * count)
        if target >= count:
            target = count - 1
        for o in range(P):
            if free1[o] and free2[(o + d) % P]:
                if target == 0:
                    offsets[i] = o
                    break
                target -= 1
        o = offsets[i]
        _block(free1, o, tau, P)
        _block(free2, (o + d) % P, tau, P)
    return offsets, -1


@njit(cache=True)
def greedy_potential(delays, P):
    """Input-order greedy picking the offset that most raises the potential of later messages."""
    n = delays.shape[0]
    occ1 = np.full(P, -1, dtype=np.int64)
    occ2 = np.full(P, -1, dtype=np.int64)
    offsets = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        d = delays[i]
        best = -1
        best_score = -1
        for o in range(P):
            if occ1[o] >= 0 or occ2[(o + d) % P] >= 0:
                continue
            score = 0
            for u in range(i + 1, n):
                if occ2[(o + delays[u]) % P] >= 0:
                    score += 1
                if occ1[(o + d - delays[u]) % P] >= 0:
                    score += 1
            if score > best_score:
                best_score = score
                best = o
        if best < 0:
            return offsets, i
        offsets[i] = best
        occ1[best] = i
        occ2[(best + d) % P] = i
    return offsets, -1


# --- Swap and Move ------------------------------------------------------------


@njit(cache=True)
def _place(i, o, delays, P, occ1, occ2, offsets, pos_pot):
    q = (o + delays[i]) % P
    occ1[o] = i
    occ2[q] = i
    offsets[i] = o
    for j in range(delays.shape[0]):
        pos_pot[(q - delays[j]) % P] += 1


@njit(cache=True)
def _remove(i, delays, P, occ1, occ2, offsets, pos_pot):
    o = offsets[i]
    q = (o + delays[i]) % P
    occ1[o] = -1
    occ2[q] = -1
    offsets[i] = -1
    for j in range(delays.shape[0]):
        pos_pot[(q - delays[j]) % P] -= 1


@njit(cache=True)
def _first_free(d, P, occ1, occ2, start):
    for o in range(start, P):
        if occ1[o] < 0 and occ2[(o + d) % P] < 0:
            return o
    return -1


@njit(cache=True)
def _ff_pass(delays, P, occ1, occ2, offsets, pos_pot):
    for i in range(delays.shape[0]):
        if offsets[i] < 0:
            o = _first_free(delays[i], P, occ1, occ2, 0)
            if o >= 0:
                _place(i, o, delays, P, occ1, occ2, offsets, pos_pot)


@njit(cache=True)
def _try_move(i, delays, P, occ1, occ2, offsets, pos_pot):
    d = delays[i]
    for o in range(P):
        b1 = occ1[o]
        b2 = occ2[(o + d) % P]
        if b1 == b2:
            b2 = -1
        if b1 < 0:
            b1, b2 = b2, -1
        if b1 < 0:
            continue
        old1 = offsets[b1]
        old2 = offsets[b2] if b2 >= 0 else -1
        _remove(b1, delays, P, occ1, occ2, offsets, pos_pot)
        if b2 >= 0:
            _remove(b2, delays, P, occ1, occ2, offsets, pos_pot)
        _place(i, o, delays, P, occ1, occ2, offsets, pos_pot)
        o1 = _first_free(delays[b1], P, occ1, occ2, 0)
        while o1 >= 0:
            _place(b1, o1, delays, P, occ1, occ2, offsets, pos_pot)
            if b2 < 0:
                return True
            o2 = _first_free(delays[b2], P, occ1, occ2, 0)
            if o2 >= 0:
                _place(b2, o2, delays, P, occ1, occ2, offsets, pos_pot)
                return True
            _remove(b1, delays, P, occ1, occ2, offsets, pos_pot)
            o1 = _first_free(delays[b1], P, occ1, occ2, o1 + 1)
        _remove(i, delays, P, occ1, occ2, offsets, pos_pot)
        _place(b1, old1, delays, P, occ1, occ2, offsets, pos_pot)
        if b2 >= 0:
            _place(b2, old2, delays, P, occ1, occ2, offsets, pos_pot)
    return False


@njit(cache=True)
def swap_and_move(delays, P):
    """Returns ``(offsets, swaps, moves)``; unscheduled messages keep offset -1."""
    n = delays.shape[0]
    occ1 = np.full(P, -1, dtype=np.int64)
    occ2 = np.full(P, -1, dtype=np.int64)
    offsets = np.full(n, -1, dtype=np.int64)
    pos_pot = np.zeros(P, dtype=np.int64)
    swaps = 0
    moves = 0
    _ff_pass(delays, P, occ1, occ2, offsets, pos_pot)
    while True:
        blocked = -1
        for i in range(n):
            if offsets[i] < 0:
                blocked = i
                break
        if blocked < 0:
            break
        d = delays[blocked]
        best_o = -1
        best_delta = 0
        for o in range(P):
            if occ1[o] >= 0:
                continue
            j = occ2[(o + d) % P]
            delta = pos_pot[o] - pos_pot[offsets[j]]
            if delta > best_delta:
                best_delta = delta
                best_o = o
        if best_o >= 0:
            j = occ2[(best_o + d) % P]
            _remove(j, delays, P, occ1, occ2, offsets, pos_pot)
            _place(blocked, best_o, delays, P, occ1, occ2, offsets, pos_pot)
            swaps += 1
            _ff_pass(delays, P, occ1, occ2, offsets, pos_pot)
            continue
        moved = False
        for i in range(n):
            if offsets[i] < 0 and _try_move(i, delays, P, occ1, occ2, offsets, pos_pot):
                moved = True
                break
        if not moved:
            break
        moves += 1
        _ff_pass(delays, P, occ1, occ2, offsets, pos_pot)
    return offsets, swaps, moves
