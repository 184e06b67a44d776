import itertools
from unittest import mock
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instances
from oracles import brute_valid, slots
from pma import compact
from pma.compact import (
    SplitDelay,
    bound_table,
    compact_fit,
    compact_k_tuples_solve,
    compact_pair_solve,
    find_compact_pair,
    find_compact_tuple,
    gap,
    split_delays,
    tuple_supply,
)
from pma.core import Instance, is_valid
from pma.greedy import meta_offset


def sd(*quots, rems=None):
    rems = rems or [0] * len(quots)
    return [SplitDelay(i, q, r) for i, (q, r) in enumerate(zip(quots, rems))]


def chained(inst, offsets, i, j):
    """Chaining equation between consecutive members ``i`` then ``j``."""
    tau, P = inst.tau, inst.period
    qi, qj = inst.delays[i] // tau, inst.delays[j] // tau
    return (offsets[i] + (qi + 1) * tau - offsets[j] - qj * tau) % P == 0


# --- gaps and pairs ---------------------------------------------------------------


def test_gap_examples():
    a, b = sd(2, 0)
    assert gap(a, b, 6) == 3
    a, b = sd(3, 4)
    assert gap(a, b, 6) == 0
    a, b = sd(4, 4)
    assert gap(a, b, 6) == 1


def test_split_delays_sorted_by_remainder_then_index():
    s = split_delays(Instance(12, 3, (7, 3, 5, 0)))
    assert [(x.msg, x.quot, x.rem) for x in s] == [(1, 1, 0), (3, 0, 0), (0, 2, 1), (2, 1, 2)]


@pytest.mark.parametrize(
    "quots, members, rel",
    [
        ((5, 5, 0), (0, 1), (0, 1)),
        ((0, 5, 1), (0, 1), (0, 4)),
        ((2, 3, 3), (1, 2), (0, 1)),  # first gaps vanish, last two share a quotient
        ((3, 2, 2), (0, 1), (0, 2)),
    ],
)
def test_find_compact_pair_cases(quots, members, rel):
    pair = find_compact_pair(sd(*quots), 8)
    assert pair.members == members and pair.rel == rel


def test_find_compact_pair_needs_three():
    with pytest.raises(ValueError):
        find_compact_pair(sd(1, 2), 8)


@pytest.mark.parametrize("m, tau", [(3, 1), (4, 2), (5, 3), (8, 2)])
def test_three_messages_always_hold_a_pair(m, tau):
    for quots in itertools.product(range(m), repeat=3):
        for rems in itertools.combinations_with_replacement(range(tau), 3):
            pair = find_compact_pair(sd(*quots, rems=list(rems)), m, tau)
            assert pair is not None and pair.rel[1] != 0


def test_tuple_supply_values():
    assert [tuple_supply(k) for k in (1, 2, 3, 8)] == [1, 3, 8, 148]


def test_triples_from_eight_messages_exhaustive():
    # quotients over m = 4 meta-offsets, unit messages
    for quots in itertools.product(range(4), repeat=8):
        assert find_compact_tuple(sd(*quots), 3, 4, 1) is not None


@given(st.integers(2, 8), st.data())
def test_tuple_supply_is_enough(k, data):
    tau = data.draw(st.integers(1, 4))
    m = data.draw(st.integers(k + 1, 3 * k + 4))
    size = tuple_supply(k)
    quots = data.draw(st.lists(st.integers(0, m - 1), min_size=size, max_size=size))
    rems = sorted(data.draw(st.lists(st.integers(0, tau - 1), min_size=size, max_size=size)))
    tup = find_compact_tuple(sd(*quots, rems=rems), k, m, tau)
    assert tup is not None and tup.k == k
    assert len(set(tup.rel)) == k and tup.rel[0] == 0


def test_equal_delays_chain_with_unit_gaps():
    tup = find_compact_tuple(sd(3, 3, 3, 3), 4, 8)
    assert tup.members == (0, 1, 2, 3) and tup.rel == (0, 1, 2, 3)


# --- solvers ----------------------------------------------------------------------


SOLVERS = [compact_pair_solve, compact_fit, lambda i: compact_k_tuples_solve(i, 3), lambda i: compact_k_tuples_solve(i, 8)]


@pytest.mark.parametrize("solver", SOLVERS)
def test_requires_tau_to_divide_period(solver):
    with pytest.raises(ValueError, match="normalize"):
        solver(Instance(10, 3, (1, 2)))


@pytest.mark.parametrize("solver", SOLVERS)
def test_single_message_at_meta_offset_zero(solver):
    assert solver(Instance(12, 3, (5,))).offsets == (0,)


@pytest.mark.parametrize("solver", SOLVERS)
@given(inst=instances(max_period=40, max_tau=4, max_n=10, divisible=True))
def test_outputs_validate(solver, inst):
    out = solver(inst)
    if out.success:
        assert brute_valid(inst, out.offsets)
        assert all(o % inst.tau == 0 for o in out.offsets)


def test_equal_delays_pair_up():
    for m in range(2, 12):
        for n in range(1, m):
            inst = Instance(3 * m, 3, (4,) * n)
            assert compact_pair_solve(inst).success


def test_two_messages_without_pair_fall_back():
    inst = Instance(8, 2, (2, 4))  # quotients 1 then 2: gap 0
    out = compact_pair_solve(inst)
    assert out.offsets == meta_offset(inst).offsets


@given(instances(max_period=48, max_tau=4, max_n=12, divisible=True))
def test_one_tuples_are_meta_offset(inst):
    assert compact_k_tuples_solve(inst, 1).partial == meta_offset(inst).partial


@given(instances(max_period=60, max_tau=4, max_n=16, divisible=True))
def test_pairs_agree_with_compact_pair(inst):
    if inst.period // inst.tau < 3:
        return
    assert compact_k_tuples_solve(inst, 2).partial == compact_pair_solve(inst).partial


def _recorded_tuples(solver, inst):
    seen = []
    original = compact._place_tuple

    def spy(pa, tup, m):
        ok = original(pa, tup, m)
        if ok:
            seen.append(tup)
        return ok

    with mock.patch.object(compact, "_place_tuple", spy):
        out = solver(inst)
    return out, seen


@given(inst=instances(max_period=60, max_tau=5, max_n=14, divisible=True))
def test_placed_pairs_satisfy_chaining(inst):
    out, tuples = _recorded_tuples(compact_pair_solve, inst)
    P, tau = inst.period, inst.tau
    for tup in tuples:
        i, j = tup.members
        offs = dict(enumerate(out.partial))
        assert chained(inst, offs, i, j)
        # window of j starts within tau slots after the end of i's window
        end_i = (offs[i] + inst.delays[i] + tau) % P
        start_j = (offs[j] + inst.delays[j]) % P
        assert (start_j - end_i) % P == inst.delays[j] % tau - inst.delays[i] % tau
        if inst.delays[i] % tau == inst.delays[j] % tau:
            assert slots(P, 2 * tau, offs[i] + inst.delays[i]) == slots(P, tau, offs[i] + inst.delays[i]) | slots(P, tau, offs[j] + inst.delays[j])


@given(st.data())
def test_tuple_interference_in_second_period(data):
    """A j-tuple forbids at most j + i base meta-offsets to a later i-tuple in the second period."""
    tau = data.draw(st.integers(1, 3))
    j = data.draw(st.integers(1, 4))
    i = data.draw(st.integers(2, 4))
    m = data.draw(st.integers(i + j + 2, 16))
    P = m * tau
    rems = sorted(data.draw(st.lists(st.integers(0, tau - 1), min_size=i + j, max_size=i + j)))
    quots = data.draw(st.lists(st.integers(0, m - 1), min_size=i + j, max_size=i + j))
    pool = sd(*quots, rems=rems)
    old = find_compact_tuple(pool[:j], j, m, tau) if j > 1 else compact.CompactTuple((0,), (0,))
    new = find_compact_tuple(pool[j:], i, m, tau)
    if old is None or new is None:
        return
    delays = [q * tau + r for q, r in zip(quots, rems)]
    base_old = data.draw(st.integers(0, m - 1))
    used2 = set()
    for msg, r in zip(old.members, old.rel):
        used2 |= slots(P, tau, ((base_old + r) % m) * tau + delays[msg])
    blocked = 0
    for b in range(m):
        hit = any(slots(P, tau, ((b + r) % m) * tau + delays[msg]) & used2 for msg, r in zip(new.members, new.rel))
        blocked += hit
    assert blocked <= j + i


def test_compact_fit_builds_two_pairs():
    # remainders 0,1,1,1: 0-1 chain, 2 cannot extend, 3 chains after 2
    inst = Instance(12, 2, (0, 1, 3, 3))
    out = compact_fit(inst)
    assert out.offsets == (0, 2, 4, 6)
    assert is_valid(inst, out.offsets)
    offs = dict(enumerate(out.offsets))
    assert chained(inst, offs, 0, 1) and chained(inst, offs, 2, 3)
    assert not chained(inst, offs, 1, 2)


def test_compact_fit_equal_delays_nearly_full():
    trials = wins = 0
    for tau in (1, 2, 3, 4):
        for m in range(2, 24 // tau + 1):
            for d in range(m * tau):
                trials += 1
                inst = Instance(m * tau, tau, (d,) * (m - 1))
                out = compact_fit(inst)
                wins += out.success and brute_valid(inst, out.offsets)
    assert wins / trials >= 0.9


# --- bound table ------------------------------------------------------------------


def test_bound_table_thresholds():
    assert bound_table(1).guaranteed_load == Fraction(1, 3)
    t2 = bound_table(2)
    assert t2.guaranteed_load == Fraction(3, 8) and t2.asymptotic_load == Fraction(3, 8)
    assert t2.n[2] == Fraction(1, 8)
    assert bound_table(8).guaranteed_load == Fraction(2, 5)


def test_bound_table_asymptotic_values():
    # frozen from an independent float recurrence below
    def recur(k):
        nu = {}
        for i in range(k, 1, -1):
            used = sum(nu[j] * (j * i + j + i) for j in nu)
            nu[i] = max(0.0, (1 - used) / (i * i + 2 * i))
        used = sum(nu[j] * (2 * j + 1) for j in nu)
        nu[1] = max(0.0, (1 - used) / 3)
        return sum(i * v for i, v in nu.items())

    for k in range(1, 9):
        assert float(bound_table(k).asymptotic_load) == pytest.approx(recur(k), rel=1e-12)
    assert bound_table(8).asymptotic_load == Fraction(131061199, 325140480)


def test_bound_table_csv_shape():
    lines = bound_table(2).to_csv().splitlines()
    assert lines[0] == "i,n_i" and lines[1].startswith("2,") and lines[2].startswith("1,")
    assert lines[-2] == "guaranteed_load,min_n" and lines[-1].startswith("3/8,")


def test_bound_table_rejects_bad_k():
    with pytest.raises(ValueError):
        bound_table(0)


def test_bound_table_min_n_is_consistent():
    t = bound_table(3)
    m = int(t.min_n / t.guaranteed_load) + 1
    assert compact.finite_counts(3, t.min_n, m) is not None
    assert compact.finite_counts(3, t.min_n - 1, int((t.min_n - 1) / t.guaranteed_load) + 1) is None
