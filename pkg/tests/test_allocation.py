import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eprnet import (
    AllocationError,
    AllocationInstance,
    RateVector,
    bezakova_matching,
    channels_by_pair,
    exact_maxmin,
    first_fit,
    fractional_optimum,
    lp_round,
    modified_lpt,
    random_balanced,
    received_rates,
    round_robin,
)
from oracles import enumerate_best_min, lp_fractional_search


def make_instance(etas, rates):
    return AllocationInstance(tuple(etas), RateVector(tuple(float(r) for r in rates)))


def random_instance(rng: random.Random, max_k=4, max_m=10, min_m=1):
    k = rng.randint(1, max_k)
    m = rng.randint(min_m, max_m)
    etas = [rng.uniform(0.001, 1.0) for _ in range(k)]
    rates = [rng.uniform(0.0, 3.0) if rng.random() > 0.1 else 0.0
             for _ in range(m)]
    return make_instance(etas, rates)


@st.composite
def instances(draw, max_k=4, max_m=8, min_m=1):
    k = draw(st.integers(1, max_k))
    m = draw(st.integers(min_m, max_m))
    etas = draw(st.lists(st.floats(0.001, 1.0), min_size=k, max_size=k))
    rates = draw(st.lists(st.floats(0.0, 5.0), min_size=m, max_size=m))
    return make_instance(etas, rates)


def assert_partition(instance, allocation):
    assert len(allocation.assignment) == instance.channel_count
    assert all(0 <= p < instance.pair_count for p in allocation.assignment)
    groups = channels_by_pair(allocation.assignment, instance.pair_count)
    flat = sorted(x for group in groups for x in group)
    assert flat == list(range(instance.channel_count))
    assert allocation.received == received_rates(instance, allocation.assignment)
    assert allocation.min_rate == min(allocation.received)


ALL_FUNCS = [
    ("exact", lambda inst: exact_maxmin(inst).allocation),
    ("first-fit", lambda inst: first_fit(inst)),
    ("round-robin", lambda inst: round_robin(inst)),
    ("random", lambda inst: random_balanced(inst, 7)),
    ("lpt", lambda inst: modified_lpt(inst)),
    ("lp-round", lambda inst: lp_round(inst)),
]


class TestInstanceValidation:
    def test_empty_pairs_rejected(self):
        with pytest.raises(AllocationError):
            AllocationInstance((), RateVector((1.0,)))

    @pytest.mark.parametrize("eta", [0.0, -0.5, 1.5, math.nan])
    def test_bad_eta_rejected(self, eta):
        with pytest.raises(AllocationError):
            make_instance([eta], [1.0])

    def test_empty_rates_rejected(self):
        with pytest.raises(ValueError):
            RateVector(())

    @pytest.mark.parametrize("rate", [-1.0, math.nan])
    def test_bad_rate_rejected(self, rate):
        with pytest.raises(ValueError):
            RateVector((rate,))


class TestReceivedRates:
    def test_degenerate_partition(self):
        inst = make_instance([0.25, 0.5, 1.0], [1.0, 2.0, 3.0])
        assert received_rates(inst, [0, 0, 0]) == (1.5, 0.0, 0.0)

    def test_identity_transmittance(self):
        inst = make_instance([1.0, 1.0], [2.0, 1.0])
        assert received_rates(inst, [0, 1]) == (2.0, 1.0)

    def test_scaled_transmittance(self):
        inst = make_instance([0.5, 0.1], [4.0, 4.0])
        assert received_rates(inst, [0, 1]) == (2.0, pytest.approx(0.4, rel=1e-15))

    def test_mapping_form(self):
        inst = make_instance([1.0, 1.0], [2.0, 1.0])
        assert received_rates(inst, {1: 0, 0: 1}) == (1.0, 2.0)

    def test_wrong_length_rejected(self):
        inst = make_instance([1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            received_rates(inst, [0])

    def test_missing_channel_rejected(self):
        inst = make_instance([1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            received_rates(inst, {0: 0})

    def test_unknown_channel_rejected(self):
        inst = make_instance([1.0], [1.0])
        with pytest.raises(AllocationError):
            received_rates(inst, {0: 0, 3: 0})

    def test_out_of_range_pair_rejected(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            received_rates(inst, [0, 2])

    def test_fractional_pair_rejected(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            received_rates(inst, [0, 0.5])


class TestFractionalOptimum:
    def test_symmetric_split(self):
        inst = make_instance([1.0, 1.0, 1.0], [2.0, 3.0, 1.0])
        assert fractional_optimum(inst) == pytest.approx(2.0, rel=1e-15)

    def test_uneven_transmittance(self):
        inst = make_instance([1.0, 0.5], [3.0, 1.0])
        assert fractional_optimum(inst) == pytest.approx(4.0 / 3.0, rel=1e-15)

    @pytest.mark.parametrize("case", range(20))
    def test_matches_lp_feasibility_oracle(self, case):
        rng = random.Random(3100 + case)
        inst = random_instance(rng)
        closed = fractional_optimum(inst)
        lp = lp_fractional_search(list(inst.etas), list(inst.rates))
        assert closed == pytest.approx(lp, rel=1e-9, abs=1e-12)

    @pytest.mark.parametrize("case", range(25))
    def test_upper_bounds_integer_optimum(self, case):
        rng = random.Random(4400 + case)
        inst = random_instance(rng, max_m=8)
        res = exact_maxmin(inst)
        assert res.optimal
        assert res.allocation.min_rate <= fractional_optimum(inst) * (1 + 1e-12)


class TestExactMaxmin:
    def test_two_channel_example(self):
        inst = make_instance([1.0, 1.0], [2.0, 1.0])
        res = exact_maxmin(inst)
        assert res.optimal
        assert res.allocation.min_rate == 1.0

    def test_single_pair(self):
        inst = make_instance([0.25], [2.0, 1.0, 0.5])
        res = exact_maxmin(inst)
        assert res.optimal
        assert res.allocation.min_rate == received_rates(inst, [0, 0, 0])[0]

    @pytest.mark.parametrize("case", range(40))
    def test_equals_enumeration(self, case):
        rng = random.Random(5200 + case)
        inst = random_instance(rng)
        res = exact_maxmin(inst, node_budget=10_000_000)
        assert res.optimal
        want = enumerate_best_min(list(inst.etas), list(inst.rates))
        assert res.allocation.min_rate == want

    def test_budget_stop_keeps_incumbent(self):
        rng = random.Random(6)
        inst = make_instance(
            [rng.uniform(0.01, 1.0) for _ in range(4)],
            [rng.uniform(0.1, 3.0) for _ in range(12)],
        )
        res = exact_maxmin(inst, node_budget=5)
        assert not res.optimal
        assert_partition(inst, res.allocation)
        assert res.allocation.min_rate >= 0.0

    def test_hint_short_circuits(self):
        inst = make_instance([1.0, 1.0], [2.0, 1.0, 1.0])
        full = exact_maxmin(inst)
        again = exact_maxmin(inst, target_hint=full.allocation.min_rate)
        assert again.optimal
        assert again.allocation.min_rate >= full.allocation.min_rate

    def test_warm_start_returns_at_root(self):
        rng = random.Random(77)
        inst = random_instance(rng, max_k=4, max_m=10, min_m=6)
        full = exact_maxmin(inst)
        assert full.optimal
        warm = exact_maxmin(
            inst,
            pair_order=list(range(inst.pair_count))[::-1],
            target_hint=full.allocation.min_rate,
            warm=full.allocation.assignment,
        )
        assert warm.optimal
        assert warm.nodes_explored == 0
        assert warm.allocation.min_rate == full.allocation.min_rate

    def test_bad_warm_rejected(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            exact_maxmin(inst, warm=[0])
        with pytest.raises(AllocationError):
            exact_maxmin(inst, warm=[0, 2])

    def test_bad_pair_order_rejected(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            exact_maxmin(inst, pair_order=[0, 0])


class TestFirstFit:
    def test_uniform_example(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0, 1.0, 1.0])
        allocation = first_fit(inst, [0, 1])
        assert allocation.assignment == (0, 0, 1, 1)
        assert allocation.received == (2.0, 2.0)

    def test_single_pair_takes_everything(self):
        inst = make_instance([0.5], [1.0, 2.0])
        assert first_fit(inst).assignment == (0, 0)

    @pytest.mark.parametrize("case", range(30))
    def test_never_beats_exact(self, case):
        rng = random.Random(7700 + case)
        inst = random_instance(rng, max_m=8)
        order = list(range(inst.pair_count))
        rng.shuffle(order)
        ff = first_fit(inst, order)
        res = exact_maxmin(inst)
        assert res.optimal
        assert ff.min_rate <= res.allocation.min_rate

    @pytest.mark.parametrize("case", range(15))
    def test_pass_feasibility_monotone_in_target(self, case):
        # The pass at target T serves prefixes; raising T only extends
        # them, so feasibility can flip from True to False just once.
        rng = random.Random(8800 + case)
        inst = random_instance(rng, min_m=2)
        k, m = inst.pair_count, inst.channel_count
        order = list(range(k))
        rng.shuffle(order)

        def feasible(target: float) -> bool:
            mass = [0.0] * k
            cursor = 0
            for x in range(m):
                p = order[cursor] if cursor < k else order[k - 1]
                mass[p] += inst.rates[x]
                if cursor < k and inst.etas[p] * mass[p] >= target:
                    cursor += 1
            return cursor >= k

        tf = fractional_optimum(inst)
        flags = [feasible(t * tf / 40) for t in range(41)]
        assert flags == sorted(flags, reverse=True)


class TestRoundRobin:
    def test_descending_deal(self):
        inst = make_instance([1.0, 1.0], [3.0, 2.0, 1.0])
        allocation = round_robin(inst, [0, 1])
        assert allocation.assignment == (0, 1, 0)
        assert allocation.received == (4.0, 2.0)

    def test_single_pair(self):
        inst = make_instance([1.0], [1.0, 5.0])
        assert round_robin(inst).assignment == (0, 0)

    @given(instances())
    @settings(max_examples=60, deadline=None)
    def test_counts_balanced(self, inst):
        allocation = round_robin(inst)
        counts = [len(g) for g in
                  channels_by_pair(allocation.assignment, inst.pair_count)]
        assert max(counts) - min(counts) <= 1
        assert_partition(inst, allocation)


class TestRandomBalanced:
    def test_counts_exact_split(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0, 1.0, 1.0])
        allocation = random_balanced(inst, 3)
        counts = [len(g) for g in channels_by_pair(allocation.assignment, 2)]
        assert counts == [2, 2]

    def test_same_seed_same_allocation(self):
        inst = make_instance([0.5, 0.25, 1.0], [1.0, 2.0, 3.0, 4.0, 5.0])
        assert random_balanced(inst, 42).assignment == \
            random_balanced(inst, 42).assignment

    def test_uniform_first_channel(self):
        # m=2, k=2: a uniform shuffle puts channel 0 on pair 0 half the
        # time; 10000 seeds must land within two points of that.
        inst = make_instance([1.0, 1.0], [1.0, 2.0])
        hits = sum(random_balanced(inst, seed).assignment[0] == 0
                   for seed in range(10_000))
        assert 0.48 <= hits / 10_000 <= 0.52

    @given(instances())
    @settings(max_examples=60, deadline=None)
    def test_counts_differ_by_at_most_one(self, inst):
        allocation = random_balanced(inst, 11)
        counts = [len(g) for g in
                  channels_by_pair(allocation.assignment, inst.pair_count)]
        assert max(counts) - min(counts) <= 1


class TestModifiedLpt:
    def test_greedy_example(self):
        inst = make_instance([1.0, 1.0], [3.0, 2.0, 1.0])
        allocation = modified_lpt(inst)
        assert allocation.received == (3.0, 3.0)

    def test_symmetric_counts(self):
        inst = make_instance([1.0, 1.0, 1.0], [1.0] * 7)
        counts = [len(g) for g in
                  channels_by_pair(modified_lpt(inst).assignment, 3)]
        assert max(counts) - min(counts) <= 1

    @pytest.mark.parametrize("case", range(20))
    def test_partition_only_no_ordering_guarantee(self, case):
        rng = random.Random(9900 + case)
        inst = random_instance(rng)
        assert_partition(inst, modified_lpt(inst))


class TestBezakovaMatching:
    def test_worked_example(self):
        inst = make_instance([1.0, 1.0], [2.0, 1.0, 1.0])
        allocation = bezakova_matching(inst)
        assert sorted(allocation.received) == [2.0, 2.0]

    def test_single_pair(self):
        inst = make_instance([0.5], [2.0, 1.0])
        allocation = bezakova_matching(inst)
        assert allocation.assignment == (0, 0)
        assert allocation.min_rate == received_rates(inst, [0, 0])[0]

    def test_fewer_channels_than_pairs_rejected(self):
        inst = make_instance([1.0, 1.0, 1.0], [1.0, 1.0])
        with pytest.raises(AllocationError):
            bezakova_matching(inst)

    @pytest.mark.parametrize("case", range(40))
    def test_guarantee_against_exact(self, case):
        rng = random.Random(11_000 + case)
        inst = random_instance(rng, max_m=9)
        if inst.channel_count < inst.pair_count:
            inst = make_instance(
                list(inst.etas) * 1,
                list(inst.rates) + [1.0] * (inst.pair_count - inst.channel_count),
            )
        res = exact_maxmin(inst)
        assert res.optimal
        bound = res.allocation.min_rate / (
            inst.channel_count - inst.pair_count + 1)
        allocation = bezakova_matching(inst)
        assert allocation.min_rate >= bound * (1 - 1e-12)
        assert_partition(inst, allocation)


class TestLpRound:
    def test_no_sharing_example(self):
        inst = make_instance([1.0, 1.0], [1.0, 1.0])
        allocation = lp_round(inst)
        assert allocation.received == (1.0, 1.0)
        assert allocation.min_rate == 1.0

    def test_single_pair(self):
        inst = make_instance([0.5], [1.0, 2.0])
        assert lp_round(inst).assignment == (0, 0)

    @pytest.mark.parametrize("case", range(50))
    def test_guarantee_bound(self, case):
        rng = random.Random(12_000 + case)
        inst = random_instance(rng)
        tf = fractional_optimum(inst)
        worst = max(e * r for e in inst.etas for r in inst.rates)
        allocation = lp_round(inst)
        bound = max(0.0, tf - worst)
        assert allocation.min_rate >= bound * (1 - 1e-9) - 1e-15
        assert_partition(inst, allocation)


class TestCrossStrategyInvariants:
    @given(instances())
    @settings(max_examples=50, deadline=None)
    def test_partition_and_dominance(self, inst):
        res = exact_maxmin(inst)
        assert res.optimal
        tf = fractional_optimum(inst)
        exact_min = res.allocation.min_rate
        assert_partition(inst, res.allocation)
        assert exact_min <= tf * (1 + 1e-12)
        heuristics = [first_fit(inst), round_robin(inst),
                      random_balanced(inst, 5), modified_lpt(inst),
                      lp_round(inst)]
        if inst.channel_count >= inst.pair_count:
            heuristics.append(bezakova_matching(inst))
        for allocation in heuristics:
            assert_partition(inst, allocation)
            assert 0.0 <= allocation.min_rate <= exact_min

    @pytest.mark.parametrize("name,func", ALL_FUNCS)
    def test_deterministic(self, name, func):
        rng = random.Random(60)
        inst = random_instance(rng, max_m=8, min_m=4)
        assert func(inst).assignment == func(inst).assignment
