import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bathtub_repair import (
    BATHTUB_EXAMPLE,
    VirtualAgeState,
    advance,
    apply_repair,
    conditional_intensity,
    virtual_age_curve,
)
from bathtub_repair.repair import contract_age, events_to_csv, fmt

A1 = BATHTUB_EXAMPLE.a1


def state_at(now, age, crossed=None):
    return VirtualAgeState(a1=A1, now=now, age=age, crossed_a1=now >= A1 if crossed is None else crossed)


class TestAdvance:
    def test_fresh_state_tracks_calendar_time(self):
        s = advance(VirtualAgeState.fresh(BATHTUB_EXAMPLE), 2.5)
        assert s.age == 2.5 and s.now == 2.5 and not s.crossed_a1

    def test_reset_at_a1(self):
        # age 3.7 at calendar 3 after an earlier repair; crossing a1 resets the age
        s = advance(state_at(3.0, 3.7), 5.0)
        assert s.age == 5.0
        assert s.crossed_a1

    def test_no_second_reset(self):
        s = advance(state_at(5.0, 4.3), 6.0)
        assert s.age == pytest.approx(5.3, abs=1e-15)

    def test_reset_lands_on_a1(self):
        s = advance(state_at(1.0, 3.5), A1)
        assert s.age == A1

    def test_backwards_rejected(self):
        with pytest.raises(ValueError):
            advance(state_at(3.0, 3.0), 2.0)

    def test_unit_slope_between_events(self):
        s0 = state_at(4.5, 6.1)
        s1 = advance(s0, 5.0)
        s2 = advance(s1, 7.25)
        assert s2.age - s1.age == pytest.approx(2.25, abs=1e-14)


class TestApplyRepair:
    def test_perfect_repair_in_burn_in(self):
        s = apply_repair(state_at(2.0, 2.0, crossed=False), 1.0)
        assert s.age == 4.0
        assert s.now == 2.0
        assert s.history[-1].age_before == 2.0 and s.history[-1].age_after == 4.0

    def test_imperfect_repair_after_a1(self):
        s = apply_repair(state_at(6.5, 6.5), 0.4)
        # 6.5 - 0.4 * (6.5 - 4)
        assert s.age == pytest.approx(5.5, abs=1e-14)

    @pytest.mark.parametrize("age", [0.0, 1.3, 4.0, 7.9, 12.0])
    def test_minimal_repair_is_identity(self, age):
        s = apply_repair(state_at(age + 0.1, age), 0.0)
        assert s.age == age

    @pytest.mark.parametrize("bad", [-0.1, 1.1])
    def test_degree_range(self, bad):
        with pytest.raises(ValueError):
            apply_repair(state_at(1.0, 1.0), bad)

    def test_failure_times_strictly_increasing(self):
        s = apply_repair(state_at(2.0, 2.0, crossed=False), 0.3)
        with pytest.raises(ValueError):
            apply_repair(s, 0.3)

    def test_history_grows(self):
        s = VirtualAgeState.fresh(BATHTUB_EXAMPLE)
        for t, d in [(0.5, 0.2), (1.0, 0.0), (5.0, 0.9)]:
            s = apply_repair(advance(s, t), d)
        assert [ev.time for ev in s.history] == [0.5, 1.0, 5.0]
        assert s.failures == 3


class TestContraction:
    @settings(max_examples=2000, deadline=None)
    @given(st.floats(0, 50), st.floats(0, 1))
    def test_unified_rule(self, age, delta):
        after = contract_age(age, delta, A1)
        assert after - A1 == pytest.approx((1 - delta) * (age - A1), abs=1e-12)

    @settings(max_examples=500, deadline=None)
    @given(st.floats(0, 50), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_effectiveness(self, age, d1, d2):
        lo, hi = sorted((d1, d2))
        assert abs(contract_age(age, hi, A1) - A1) <= abs(contract_age(age, lo, A1) - A1)

    @settings(max_examples=500, deadline=None)
    @given(st.floats(0, 50))
    def test_perfect_repair_idempotent(self, age):
        once = contract_age(age, 1.0, A1)
        assert once == A1
        assert contract_age(once, 1.0, A1) == once

    def test_matches_both_branches(self):
        # burn-in branch: t + delta * (a1 - A(T)); useful-life branch: t - delta * (A(T) - a1)
        for age, d in [(1.0, 0.3), (3.9, 0.8), (2.2, 0.5)]:
            assert contract_age(age, d, A1) == pytest.approx(age + d * (A1 - age), abs=1e-14)
        for age, d in [(4.5, 0.3), (9.0, 0.8), (12.2, 0.5)]:
            assert contract_age(age, d, A1) == pytest.approx(age - d * (age - A1), abs=1e-14)


class TestConditionalIntensity:
    def test_fresh(self):
        assert conditional_intensity(VirtualAgeState.fresh(BATHTUB_EXAMPLE), BATHTUB_EXAMPLE) == pytest.approx(20.2)

    def test_at_a1(self):
        assert conditional_intensity(state_at(2.0, A1, crossed=False), BATHTUB_EXAMPLE) == 1.0

    def test_age_nine(self):
        assert conditional_intensity(state_at(9.5, 9.0), BATHTUB_EXAMPLE) == pytest.approx(1.5, abs=1e-12)

    def test_minimal_trajectory_follows_baseline(self):
        s = VirtualAgeState.fresh(BATHTUB_EXAMPLE)
        for t in [0.3, 1.7, 3.2, 4.0, 6.6, 9.1]:
            s = apply_repair(advance(s, t), 0.0)
            assert s.age == pytest.approx(t, abs=1e-14)


class TestCurve:
    def test_no_events(self):
        assert virtual_age_curve([], BATHTUB_EXAMPLE, [0, 1, 2]) == [(0, 0), (1, 1), (2, 2)]

    def test_single_perfect_repair(self):
        assert virtual_age_curve([(2.0, 1.0)], BATHTUB_EXAMPLE, [2.0, 3.0]) == [(2.0, 4.0), (3.0, 5.0)]

    def test_reset_visible(self):
        curve = dict(virtual_age_curve([(1.0, 0.5)], BATHTUB_EXAMPLE, [1.0, 3.0, 3.999, 4.0, 6.0]))
        assert curve[1.0] == 2.5
        assert curve[3.0] == pytest.approx(4.5)
        assert curve[4.0] == 4.0
        assert curve[6.0] == 6.0

    def test_post_a1_repairs(self):
        curve = dict(virtual_age_curve([(6.0, 0.5), (8.0, 1.0)], BATHTUB_EXAMPLE, [5.0, 6.0, 7.0, 8.0, 9.0]))
        assert curve[6.0] == 5.0
        assert curve[7.0] == 6.0
        assert curve[8.0] == 4.0
        assert curve[9.0] == 5.0

    def test_unsorted_inputs(self):
        with pytest.raises(ValueError):
            virtual_age_curve([(2.0, 0.1), (1.0, 0.1)], BATHTUB_EXAMPLE, [0, 1])
        with pytest.raises(ValueError):
            virtual_age_curve([], BATHTUB_EXAMPLE, [2, 1])


class TestCsv:
    def test_header_and_rows(self):
        s = VirtualAgeState.fresh(BATHTUB_EXAMPLE)
        s = apply_repair(advance(s, 1.0 / 3.0), 0.5)
        rows = list(csv.reader(io.StringIO(events_to_csv(s.history))))
        assert rows[0] == ["index", "time", "age_before", "degree", "age_after"]
        assert rows[1] == ["0", "0.333333333333", "0.333333333333", "0.5", "2.16666666667"]

    @pytest.mark.parametrize("x, text", [(0.0, "0"), (12.78, "12.78"), (1e-12, "0.000000000001"), (123456.7891234567, "123456.789123")])
    def test_fmt(self, x, text):
        assert fmt(x) == text
