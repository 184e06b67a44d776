from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import instances
from oracles import (
    brute_available,
    brute_message_potential,
    brute_position_potential,
    brute_valid,
    uniform_success_exact,
    uniform_trace_distribution,
    used_sets,
)
from pma.core import Instance, PartialAssignment
from pma.exact import exact_solve
from pma.greedy import first_fit
from pma.sizeone import (
    PotentialState,
    greedy_potential,
    greedy_uniform,
    message_potential,
    position_potentials,
    step_failure,
    success_probability,
    success_probability_exact,
    swap,
    swap_and_move,
    swap_and_move_reference,
    swap_and_move_stats,
)

unit_instances = instances(max_period=20, max_n=12, tau=1)


def five_slot_state(extra_delay=3):
    inst = Instance(5, 1, (0, 1, extra_delay))
    state = PotentialState(inst)
    state.place(0, 0)
    state.place(1, 2)
    return inst, state


def test_message_potential_example():
    inst, state = five_slot_state()
    assert message_potential(state.partial, 3) == 2
    assert state.msg_potential[2] == 2


def test_empty_partial_has_zero_potential():
    pa = PartialAssignment(Instance(7, 1, (1, 2)))
    assert all(message_potential(pa, d) == 0 for d in range(7))


def test_potential_needs_unit_messages():
    with pytest.raises(ValueError):
        message_potential(PartialAssignment(Instance(8, 2, (1,))), 1)
    for fn in (swap_and_move, greedy_potential):
        with pytest.raises(ValueError):
            fn(Instance(8, 2, (1,)))


def test_swap_example_keeps_second_period():
    inst, state = five_slot_state(extra_delay=2)
    used2 = set(np.flatnonzero(state.partial.occ2 >= 0))
    assert used2 == {0, 3}
    delta = state.swap_delta(2, 1)
    before = state.total
    assert swap(state, 2, 1) == 1
    assert set(np.flatnonzero(state.partial.occ2 >= 0)) == used2
    assert state.total - before == delta
    assert state.invariant_errors() == []


def test_swap_back_restores_total():
    inst, state = five_slot_state(extra_delay=2)
    before = state.total
    swap(state, 2, 1)
    swap(state, 1, 2)
    assert state.total == before


def test_swap_preconditions():
    inst, state = five_slot_state(extra_delay=2)
    with pytest.raises(ValueError):
        swap(state, 0, 1)  # already scheduled
    with pytest.raises(ValueError):
        swap(state, 2, 0)  # first-period slot used
    with pytest.raises(ValueError):
        swap(state, 2, 4)  # 4 + 2 = 1 is free in the second period


def _random_walk(inst, data, steps=25):
    state = PotentialState(inst)
    for _ in range(steps):
        pending = state.partial.unscheduled()
        placed = [i for i in range(inst.n) if i not in pending]
        action = data.draw(st.sampled_from(["place", "remove", "swap"]))
        if action == "place" and pending:
            i = data.draw(st.sampled_from(pending))
            opts = state.partial.available_offsets(inst.delays[i])
            if len(opts):
                state.place(i, int(data.draw(st.sampled_from(list(opts)))))
        elif action == "remove" and placed:
            state.remove(data.draw(st.sampled_from(placed)))
        elif action == "swap" and pending:
            i = data.draw(st.sampled_from(pending))
            P = inst.period
            cands = [o for o in range(P) if state.partial.occ1[o] < 0 and state.partial.occ2[(o + inst.delays[i]) % P] >= 0]
            if cands:
                swap(state, i, data.draw(st.sampled_from(cands)))
        yield state


@given(unit_instances, st.data())
def test_incremental_potentials_match_oracle(inst, data):
    P, n = inst.period, inst.n
    for state in _random_walk(inst, data):
        used1, used2 = used_sets(inst, state.partial.offsets)
        msg = [brute_message_potential(P, used1, used2, d) for d in inst.delays]
        pos = [brute_position_potential(P, used2, inst.delays, p) for p in range(P)]
        assert list(state.msg_potential) == msg
        assert list(state.pos_potential) == pos
        assert state.total == sum(msg) == sum(pos[p] for p in used1)
        assert sum(pos) == n * state.partial.size
        s = state.partial.size
        for d in range(P):
            v = brute_message_potential(P, used1, used2, d)
            assert len(brute_available(inst, state.partial.offsets, d)) == P - 2 * s + v
        assert state.invariant_errors() == []


@given(unit_instances, st.data())
def test_position_potentials_from_scratch(inst, data):
    for state in _random_walk(inst, data, steps=10):
        assert list(position_potentials(state.partial)) == list(state.pos_potential)


@given(unit_instances)
def test_swap_progress_below_half_total(inst):
    """A blocked message admits an improving swap unless the potential is already kn/2."""
    out = first_fit(inst)
    if out.success:
        return
    state = PotentialState.from_partial(PartialAssignment.from_offsets(inst, out.partial))
    k, n, P = state.partial.size, inst.n, inst.period
    for i in state.partial.unscheduled():
        if state.available_count(inst.delays[i]):
            continue
        free = [o for o in range(P) if state.partial.occ1[o] < 0]
        best = max((state.swap_delta(i, o) for o in free), default=0)
        assert 2 * state.total >= k * n or best > 0


# --- Swap and Move ----------------------------------------------------------------


@given(instances(max_period=30, max_n=30, tau=1))
def test_kernel_matches_reference(inst):
    fast = swap_and_move_stats(inst)
    slow = swap_and_move_reference(inst)
    assert fast[0].partial == slow[0].partial
    assert fast[1:] == slow[1:]


@given(instances(max_period=40, max_n=40, tau=1))
def test_swap_and_move_outputs_validate(inst):
    out = swap_and_move(inst)
    if out.success:
        assert brute_valid(inst, out.offsets)


@given(instances(max_period=40, max_n=20, tau=1))
def test_swap_and_move_extends_first_fit(inst):
    ff = first_fit(inst)
    if ff.success:
        out, swaps, moves = swap_and_move_stats(inst)
        assert out.offsets == ff.offsets and swaps == moves == 0


def test_swap_and_move_below_guarantee():
    rng = np.random.default_rng(11)
    for n in (55, 61):
        for _ in range(300):
            inst = Instance(100, 1, tuple(rng.integers(0, 100, n)))
            out = swap_and_move(inst)
            assert out.success and brute_valid(inst, out.offsets)


def test_swap_and_move_misses_some_solvable_instances():
    rng = np.random.default_rng(3)
    gaps = 0
    for _ in range(2000):
        inst = Instance(10, 1, tuple(rng.integers(0, 10, 9)))
        if not swap_and_move(inst).success and exact_solve(inst).sat:
            gaps += 1
    assert gaps > 0


def test_reference_observer_sees_every_mutation():
    inst = Instance(10, 1, (0, 0, 1, 1, 2, 2, 3, 3))
    calls = []
    swap_and_move_reference(inst, calls.append)
    assert len(calls) >= inst.n


# --- Greedy Potential ----------------------------------------------------------------


def potential_greedy_oracle(inst):
    P = inst.period
    offsets = []
    for i in range(inst.n):
        best, best_score = None, -1
        for o in sorted(brute_available(inst.with_delays(inst.delays[:i]), offsets, inst.delays[i])):
            trial = offsets + [o]
            used1, used2 = used_sets(inst.with_delays(inst.delays[: i + 1]), trial)
            score = sum(brute_message_potential(P, used1, used2, inst.delays[u]) for u in range(i + 1, inst.n))
            if score > best_score:
                best, best_score = o, score
        if best is None:
            return None
        offsets.append(best)
    return tuple(offsets)


def test_greedy_potential_single_message():
    assert greedy_potential(Instance(9, 1, (4,))).offsets == (0,)


@given(instances(max_period=12, max_n=9, tau=1))
def test_greedy_potential_matches_oracle(inst):
    assert greedy_potential(inst).offsets == potential_greedy_oracle(inst)


def test_greedy_potential_beats_first_fit():
    rng = np.random.default_rng(5)
    for n in (70, 80, 90):
        gp = ff = 0
        for _ in range(200):
            inst = Instance(100, 1, tuple(rng.integers(0, 100, n)))
            gp += greedy_potential(inst).success
            ff += first_fit(inst).success
        assert gp >= ff


# --- Greedy Uniform ---------------------------------------------------------------------


def test_greedy_uniform_deterministic_per_seed():
    inst = Instance(50, 2, tuple(range(0, 40, 3)))
    assert greedy_uniform(inst, 7) == greedy_uniform(inst, 7)


@given(instances(max_period=30, max_tau=4, max_n=10), st.integers(0, 2**31))
def test_greedy_uniform_picks_available_offsets(inst, seed):
    draws = np.random.default_rng(seed).random(inst.n)
    out = greedy_uniform(inst, seed)
    offsets = []
    for i, o in enumerate(out.partial):
        avail = sorted(brute_available(inst.with_delays(inst.delays[:i]), offsets, inst.delays[i]))
        if o is None:
            assert not avail and out.failed == i
            break
        assert o == avail[int(draws[i] * len(avail))]
        offsets.append(o)


def test_greedy_uniform_single_message_is_uniform():
    from scipy.stats import chisquare

    inst = Instance(8, 1, (3,))
    counts = np.bincount([greedy_uniform(inst, s).offsets[0] for s in range(8000)], minlength=8)
    assert chisquare(counts).pvalue > 0.001


# --- success probability -------------------------------------------------------------


def test_success_probability_small_cases():
    assert success_probability_exact(4, 3) == Fraction(5, 6)
    assert success_probability_exact(4, 4) == Fraction(5, 24)
    assert success_probability_exact(5, 5) == Fraction(7, 50)


def test_success_probability_exact_when_traces_cannot_differ():
    # tiny periods: every reachable trace has the same weight
    for m in range(1, 4):
        for n in range(m + 1):
            assert success_probability_exact(m, n) == uniform_success_exact(m, n), (m, n)


def test_product_formula_is_an_approximation():
    # frozen from exhaustive enumeration of the algorithm
    assert uniform_success_exact(4, 3) == Fraction(41, 48)
    assert uniform_success_exact(4, 4) == Fraction(41, 192)
    assert uniform_success_exact(5, 4) == Fraction(263, 375)
    for m, n in [(4, 3), (4, 4), (5, 4), (5, 5)]:
        gap = abs(float(uniform_success_exact(m, n)) - success_probability(m, n))
        assert 0 < gap < 0.03


def test_uniform_choice_does_not_give_uniform_traces():
    law = uniform_trace_distribution(6, 2)
    assert len(law) == 225
    assert max(law.values()) / min(law.values()) == Fraction(5, 4)
    law = uniform_trace_distribution(6, 3)
    assert max(law.values()) / min(law.values()) > Fraction(3, 2)


def test_success_probability_half_load_is_one():
    for m in range(1, 40):
        for n in range(0, (m + 1) // 2 + 1):
            assert success_probability(m, n) == 1.0


def test_step_failure_is_a_probability():
    for m in range(1, 30):
        for s in range(m + 1):
            assert 0 <= step_failure(m, s) <= 1


def test_success_probability_errors():
    with pytest.raises(ValueError):
        success_probability(4, 5)
    with pytest.raises(ValueError):
        success_probability(0, 0)


def test_success_probability_tends_to_one():
    vals = [success_probability(m, int(0.7 * m)) for m in (20, 40, 80)]
    assert vals[0] < vals[1] < vals[2] <= 1


def test_simulation_matches_exact_enumeration():
    rng = np.random.default_rng(9)
    trials = 20000
    wins = sum(greedy_uniform(Instance(4, 1, tuple(rng.integers(0, 4, 3))), rng).success for _ in range(trials))
    p = 41 / 48
    assert abs(wins / trials - p) <= 4 * (p * (1 - p) / trials) ** 0.5
