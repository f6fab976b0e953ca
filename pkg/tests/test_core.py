import math
import random
from fractions import Fraction

import pytest

from tctp import (
    InstanceError,
    InvalidScheduleError,
    Variant,
    evaluate,
    global_bounds,
    make_schedule,
    pad_to_full,
    set_ratio,
    sort_by_ratio,
    validate,
)
from tctp.core import check_schedule
from tctp.exact import brute_force_optimum

from conftest import make_search, make_testing, random_instance, random_schedule

F = Fraction


class TestEvaluate:
    def test_two_tests_hand_value(self):
        inst = make_testing(1, 2, [1, 2], [F(1, 2), 1])
        assert evaluate(inst, make_schedule([[0], [1]])) == 2

    def test_all_certain_tests_cost_everything(self):
        inst = make_testing(2, 2, [3, 1, 4], [1, 1, 1])
        assert evaluate(inst, make_schedule([[0, 2], [1]])) == 8
        assert evaluate(inst, make_schedule([[1], [0, 2]])) == 8

    def test_single_location_search(self):
        assert evaluate(make_search(1, 1, [5], [1]), make_schedule([[0]])) == 5

    def test_greedy_gap_schedule(self):
        inst = make_testing(2, 2, [1, 0, 10], [F(1, 10), F(9, 10), F(9, 10)])
        assert evaluate(inst, make_schedule([[1], [0, 2]])) == F(99, 10)

    def test_float_mode_close_to_exact(self):
        inst = make_testing(2, 2, [1, 0, 10], [F(1, 10), F(9, 10), F(9, 10)])
        s = make_schedule([[1], [0, 2]])
        value = evaluate(inst, s, mode="float")
        assert isinstance(value, float)
        assert value == pytest.approx(9.9)

    def test_empty_slot_allowed(self):
        inst = make_testing(2, 2, [3, 1], [F(1, 2), F(1, 3)])
        assert evaluate(inst, make_schedule([[], [0, 1]])) == 4
        assert evaluate(inst, make_schedule([[0, 1], []])) == 4

    def test_invalid_schedule_raises(self):
        inst = make_testing(1, 2, [1, 2], [F(1, 2), 1])
        with pytest.raises(InvalidScheduleError):
            evaluate(inst, make_schedule([[0, 1], []]))


class TestRatio:
    def test_testing_singleton(self):
        inst = make_testing(1, 2, [3, 1], [F(1, 2), F(1, 3)])
        assert set_ratio(inst, {0}) == 6

    def test_certain_test_is_infinite(self):
        inst = make_testing(1, 2, [3, 1], [1, F(1, 3)])
        assert set_ratio(inst, {0}) == math.inf

    def test_empty_set_is_infinite(self):
        inst = make_testing(1, 2, [3, 1], [F(1, 2), F(1, 3)])
        assert set_ratio(inst, set()) == math.inf

    def test_search_singleton(self):
        inst = make_search(1, 4, [4, 0, 0, 0], [2, 2, 2, 2])
        assert set_ratio(inst, {0}) == 16

    def test_sort_two_slots(self):
        inst = make_testing(1, 2, [3, 1], [F(1, 2), F(1, 2)])
        assert set_ratio(inst, {0}) == 6 and set_ratio(inst, {1}) == 2
        assert sort_by_ratio(inst, make_schedule([[0], [1]])) == make_schedule([[1], [0]])

    def test_sort_idempotent(self):
        inst = make_testing(1, 2, [3, 1], [F(1, 2), F(1, 2)])
        s = make_schedule([[1], [0]])
        assert sort_by_ratio(inst, s) == s

    def test_sort_stable_on_ties_and_infinity_last(self):
        inst = make_testing(1, 3, [1, 5, 1], [F(1, 2), 1, F(1, 2)])
        assert sort_by_ratio(inst, make_schedule([[1], [2], [0]])) == make_schedule([[2], [0], [1]])

    @pytest.mark.parametrize("variant", list(Variant))
    def test_sort_never_worse(self, variant):
        rng = random.Random(7)
        for _ in range(300):
            inst = random_instance(rng, variant)
            s = random_schedule(rng, inst)
            assert evaluate(inst, sort_by_ratio(inst, s)) <= evaluate(inst, s)


class TestValidate:
    def test_valid(self):
        inst = make_testing(2, 2, [1, 1, 1], [F(1, 2)] * 3)
        assert validate(inst, [[0, 1], [2]]) == []

    def test_duplicate(self):
        inst = make_testing(2, 2, [1, 1, 1], [F(1, 2)] * 3)
        kinds = {v.kind for v in validate(inst, [[0, 1], [1, 2]])}
        assert "duplicate" in kinds

    def test_capacity(self):
        inst = make_testing(2, 2, [1, 1, 1], [F(1, 2)] * 3)
        kinds = {v.kind for v in validate(inst, [[0, 1, 2], []])}
        assert kinds == {"capacity"}

    def test_missing_unknown_length(self):
        inst = make_testing(2, 2, [1, 1, 1], [F(1, 2)] * 3)
        assert {v.kind for v in validate(inst, [[0], [1]])} == {"missing"}
        assert "unknown" in {v.kind for v in validate(inst, [[0, 1], [2, 7]])}
        assert {v.kind for v in validate(inst, [[0, 1], [2], []])} == {"length"}

    def test_check_schedule_raises_with_violations(self):
        inst = make_testing(2, 2, [1, 1, 1], [F(1, 2)] * 3)
        with pytest.raises(InvalidScheduleError) as err:
            check_schedule(inst, [[0, 1, 2], []])
        assert err.value.violations


class TestInstance:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(m=1, T=1, costs=[1, 2], probs=[F(1, 2), F(1, 2)]),  # n > mT
            dict(m=3, T=1, costs=[1, 2], probs=[F(1, 2), F(1, 2)]),  # m > n
            dict(m=1, T=2, costs=[-1, 2], probs=[F(1, 2), F(1, 2)]),
            dict(m=1, T=2, costs=[1, 2], probs=[F(3, 2), F(1, 2)]),
            dict(m=1, T=2, costs=[1], probs=[F(1, 2), F(1, 2)]),
        ],
    )
    def test_rejects_bad_testing_data(self, kwargs):
        with pytest.raises(InstanceError):
            make_testing(**kwargs)

    def test_rejects_zero_weight_search(self):
        with pytest.raises(InstanceError):
            make_search(1, 2, [1, 1], [0, 0])

    def test_pi(self):
        assert make_search(1, 2, [1, 1], [1, 3]).pi == (F(1, 4), F(3, 4))


class TestBounds:
    def test_testing(self):
        b = global_bounds(make_testing(1, 2, [1, 2], [F(1, 2), 1]))
        assert (b.lower, b.upper) == (F(3, 2), 3)

    def test_certain_tests(self):
        b = global_bounds(make_testing(1, 2, [1, 2], [1, 1]))
        assert b.lower == b.upper == 3

    def test_search(self):
        b = global_bounds(make_search(1, 2, [1, 2], [1, 1]))
        assert (b.lower, b.upper) == (2, 3)

    @pytest.mark.parametrize("variant", list(Variant))
    def test_bounds_bracket_optimum(self, variant):
        rng = random.Random(3)
        for _ in range(100):
            inst = random_instance(rng, variant)
            b = global_bounds(inst)
            opt = brute_force_optimum(inst).objective
            assert b.lower <= opt <= b.upper


class TestPadding:
    def test_identity_when_full(self):
        inst = make_testing(2, 2, [1, 2, 3, 4], [F(1, 2)] * 4)
        assert pad_to_full(inst).instance == inst

    def test_one_dummy(self):
        inst = make_testing(2, 2, [1, 2, 3], [F(1, 2)] * 3)
        padded = pad_to_full(inst).instance
        assert padded.n == 4 and padded.costs[3] == 0 and padded.probs[3] == 1

    def test_project_and_extend(self):
        pad = pad_to_full(make_testing(2, 2, [1, 2, 3], [F(1, 2)] * 3))
        s = make_schedule([[0, 1], [2]])
        extended = pad.extend(s)
        assert validate(pad.instance, extended) == []
        assert pad.project(extended) == s

    @pytest.mark.parametrize("variant", list(Variant))
    def test_optimum_preserved(self, variant):
        rng = random.Random(11)
        for _ in range(100):
            inst = random_instance(rng, variant, max_cells=9)
            assert brute_force_optimum(pad_to_full(inst).instance).objective == brute_force_optimum(inst).objective
