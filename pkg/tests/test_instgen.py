import json
from fractions import Fraction
from math import prod

import pytest

from tctp import Variant, evaluate, make_schedule
from tctp.core import _evaluate_unchecked
from tctp.exact import brute_force_optimum, iter_schedules
from tctp.fileio import FormatError, read_instance, read_schedule, write_instance, write_schedule
from tctp.heuristics import improving_moves, local_search
from tctp.instgen import (
    GenConfig,
    Q_RANGES,
    ReductionError,
    gen_greedy_gap,
    gen_locality_gap,
    gen_random,
    locality_admissible,
    reduce_search_to_testing,
)

from conftest import make_search, make_testing

F = Fraction


class TestRandom:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_deterministic(self, variant):
        cfg = GenConfig(m=3, T=2, seed=99)
        assert gen_random(cfg, variant) == gen_random(cfg, variant)
        assert gen_random(cfg, variant) != gen_random(GenConfig(m=3, T=2, seed=100), variant)

    @pytest.mark.parametrize("name", list(Q_RANGES))
    def test_joint_probability_in_range(self, name):
        lo, hi = Q_RANGES[name]
        for seed in range(50):
            inst = gen_random(GenConfig(m=3, T=3, seed=seed, q_range=(lo, hi)), Variant.TESTING)
            q = prod(inst.probs, start=F(1))
            assert lo * (1 - F(1, 10**6)) <= q <= hi * (1 + F(1, 10**6))
            assert all(0 <= p <= 1 for p in inst.probs)

    def test_default_costs_in_range(self):
        for seed in range(30):
            inst = gen_random(GenConfig(m=4, T=3, seed=seed), Variant.TESTING)
            assert inst.n == 12
            assert all(0 <= c <= 10 for c in inst.costs)

    def test_search_weights(self):
        inst = gen_random(GenConfig(m=2, T=2, seed=0), Variant.SEARCH)
        assert all(0 <= w <= 1000 for w in inst.probs) and inst.total_weight > 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GenConfig(m=0, T=2)
        with pytest.raises(ValueError):
            GenConfig(m=2, T=2, q_range=(F(1, 2), F(1, 3)))


class TestGreedyGap:
    @pytest.mark.parametrize("M", [10, 100, 1000])
    def test_values(self, M):
        inst = gen_greedy_gap(M)
        assert evaluate(inst, make_schedule([[1], [0, 2]])) == M - F(1, M)
        assert evaluate(inst, make_schedule([[0], [1, 2]])) == 2
        # True optimum puts the two cheap tests together.
        assert brute_force_optimum(inst).objective == 2 - F(1, M)

    def test_M2(self):
        inst = gen_greedy_gap(2)
        assert evaluate(inst, make_schedule([[1], [0, 2]])) == F(3, 2)
        assert brute_force_optimum(inst).objective == F(3, 2)

    def test_rejects_small_M(self):
        with pytest.raises(ValueError):
            gen_greedy_gap(1)


class TestLocalityGap:
    @pytest.mark.parametrize("c,k,M", [(2, 2, 2), (2, 3, 2), (3, 3, 6)])
    def test_smallest_admissible_M(self, c, k, M):
        gap = gen_locality_gap(c, k)
        assert gap.M == M
        assert locality_admissible(c, k, M)
        assert all(not locality_admissible(c, k, x) for x in range(2, M))

    @pytest.mark.parametrize("c,k", [(2, 2), (2, 3), (3, 3)])
    def test_trap(self, c, k):
        gap = gen_locality_gap(c, k)
        inst = gap.instance
        assert inst.m == 2 * k and inst.T == 2
        assert gap.p**k * (c + k * gap.M) == 1
        assert evaluate(inst, gap.local_schedule) == k * (c - 1) + 1 == gap.local_value
        assert improving_moves(inst, gap.local_schedule) == []
        assert local_search(inst, gap.local_schedule).schedule == gap.local_schedule
        assert evaluate(inst, gap.optimal_schedule) == c
        assert brute_force_optimum(inst).objective == c

    def test_ratio_k2(self):
        gap = gen_locality_gap(2, 2)
        assert F(gap.local_value, 2) == F(3, 2)


class TestReduction:
    def test_worked_example(self):
        inst = make_search(1, 2, [1, 2], [1, 1])
        testing, params = reduce_search_to_testing(inst, 2)
        assert (params.W, params.M, params.gamma, params.beta) == (2, 48, 2, F(143, 48))
        s12, s21 = make_schedule([[0], [1]]), make_schedule([[1], [0]])
        assert evaluate(testing, s12) == F(142, 48) and evaluate(inst, s12) == 2
        assert evaluate(testing, s21) == F(143, 48) and evaluate(inst, s21) == F(5, 2)

    def test_vacuous_threshold(self):
        inst = make_search(1, 2, [1, 2], [1, 1])
        testing, params = reduce_search_to_testing(inst, 3)
        assert params.gamma == 0 and params.beta == 3 + F(1, params.M)
        for s in iter_schedules(2, 2, 1):
            assert _evaluate_unchecked(testing, s) < params.beta

    @pytest.mark.parametrize(
        "inst",
        [
            make_search(2, 2, [3, 1, 2], [5, 1, 2]),
            make_search(2, 3, [4, 0, 2, 1, 3], [3, 3, 0, 1, 2]),
            make_search(3, 2, [1, 2, 3, 4, 5, 6], [6, 5, 4, 3, 2, 1]),
        ],
    )
    def test_equivalence_every_schedule(self, inst):
        values = sorted({_evaluate_unchecked(inst, s) for s in iter_schedules(inst.n, inst.T, inst.m)})
        alphas = values + [(a + b) / 2 for a, b in zip(values, values[1:])]
        for alpha in alphas:
            testing, params = reduce_search_to_testing(inst, alpha)
            for s in iter_schedules(inst.n, inst.T, inst.m):
                assert (_evaluate_unchecked(inst, s) <= alpha) == (_evaluate_unchecked(testing, s) < params.beta)

    def test_errors(self):
        with pytest.raises(ReductionError):
            reduce_search_to_testing(make_testing(1, 2, [1, 2], [F(1, 2), F(1, 2)]), 1)
        with pytest.raises(ReductionError):
            reduce_search_to_testing(make_search(1, 2, [0, 0], [1, 1]), 0)
        with pytest.raises(ReductionError):
            reduce_search_to_testing(make_search(1, 2, [1, 2], [1, 1]), -1)


class TestFileIO:
    @pytest.mark.parametrize("variant", list(Variant))
    def test_round_trip(self, variant):
        inst = gen_random(GenConfig(m=3, T=2, seed=4), variant)
        text = write_instance(inst)
        assert read_instance(text) == inst
        assert write_instance(read_instance(text)) == text

    def test_zero_denominator(self):
        text = json.dumps({"variant": "testing", "m": 1, "T": 1, "costs": [1], "probs": [{"num": 1, "den": 0}]})
        with pytest.raises(FormatError):
            read_instance(text)

    def test_search_with_pairs(self):
        text = json.dumps({"variant": "search", "m": 1, "T": 1, "costs": [1], "probs": [{"num": 1, "den": 1}]})
        with pytest.raises(FormatError, match="weights"):
            read_instance(text)

    def test_infeasible_instance(self):
        text = json.dumps({"variant": "search", "m": 1, "T": 1, "costs": [1, 2], "probs": [1, 1]})
        with pytest.raises(FormatError):
            read_instance(text)

    def test_radical_not_serializable(self):
        with pytest.raises(FormatError):
            write_instance(gen_locality_gap(2, 2).instance)

    def test_schedule_one_based(self):
        s = make_schedule([[1], [0, 2]])
        assert write_schedule(s) == "[[2], [1, 3]]\n"
        assert read_schedule(write_schedule(s)) == s
        assert read_schedule('{"schedule": [[2], [1, 3]]}') == s
