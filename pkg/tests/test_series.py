import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ncpc.exceptions import InsufficientData, NonPositiveAfterShift, ParseError, SeriesTooShort
from ncpc.series import (
    Quarter,
    QuarterlySeries,
    align,
    describe,
    first_diff,
    inflation_proxy,
    lag,
    shifted_log,
)

Q0 = Quarter(1980, 1)


def series(values, start=Q0, name="x"):
    return QuarterlySeries("AU", name, start, values)


def vals(s):
    return [None if math.isnan(v) else v for v in s.values]


quarters = st.builds(Quarter, st.integers(1900, 2100), st.integers(1, 4))
finite = st.floats(-1e3, 1e3, allow_nan=False)
value_lists = st.lists(st.one_of(st.none(), finite), min_size=2, max_size=40)


class TestQuarter:
    def test_parse_and_format(self):
        assert Quarter.parse("1980Q1") == Quarter(1980, 1)
        assert str(Quarter(2016, 1)) == "2016Q1"
        assert Quarter.parse("2001q3") == Quarter(2001, 3)

    @pytest.mark.parametrize("bad", ["1980Q5", "1980Q0", "80Q1", "1980-01", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(ParseError):
            Quarter.parse(bad)

    def test_invalid_quarter_field(self):
        with pytest.raises(ValueError):
            Quarter(1980, 5)

    def test_arithmetic(self):
        assert Q0 + 4 == Quarter(1981, 1)
        assert Quarter(1980, 4) + 1 == Quarter(1981, 1)
        assert Quarter(2016, 1) - Q0 == 144
        assert Quarter(1981, 1) - 1 == Quarter(1980, 4)

    @given(quarters, quarters)
    def test_order_matches_calendar(self, a, b):
        assert (a < b) == ((a.year, a.quarter) < (b.year, b.quarter))
        assert (a - b) == (a.year - b.year) * 4 + (a.quarter - b.quarter)

    @given(quarters, st.integers(-500, 500))
    def test_add_then_subtract(self, q, k):
        assert (q + k) - q == k


class TestShiftedLog:
    def test_exact_logs(self):
        out = shifted_log(series([1.0, math.e, math.e**2]), 0.0)
        np.testing.assert_allclose(out.values, [0.0, 1.0, 2.0], atol=1e-15)

    def test_zero_shift_one(self):
        assert vals(shifted_log(series([0.0, 0.0, 0.0]), 1.0)) == [0.0, 0.0, 0.0]

    def test_non_positive_after_shift(self):
        with pytest.raises(NonPositiveAfterShift):
            shifted_log(series([-2.0, 5.0]), 1.0)

    def test_missing_stays_missing(self):
        out = shifted_log(series([1.0, None, 3.0]), 0.0)
        assert vals(out)[1] is None
        assert out.start == Q0 and len(out) == 3

    def test_missing_ignored_by_precondition(self):
        shifted_log(series([None, 2.0]), 0.0)


class TestFirstDiff:
    def test_constant_slope(self):
        out = first_diff(series([0.0, 1.0, 2.0]))
        assert vals(out) == [1.0, 1.0]
        assert out.start == Q0 + 1

    def test_constant_series(self):
        assert vals(first_diff(series([5.0, 5.0, 5.0]))) == [0.0, 0.0]

    def test_missing_propagation(self):
        assert vals(first_diff(series([1.0, None, 3.0]))) == [None, None]

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            first_diff(series([1.0]))

    @given(value_lists, quarters)
    def test_index_bookkeeping(self, values, start):
        s = series(values, start)
        d = first_diff(s)
        assert d.start == s.start + 1
        assert len(d) == len(s) - 1


class TestLag:
    def test_lag_one(self):
        out = lag(series([1.0, 2.0, 3.0]), 1)
        assert out.start == Q0 + 1
        assert out.at(Q0 + 1) == 1.0 and out.at(Q0 + 3) == 3.0

    def test_lag_two_aligned(self):
        s = series([1.0, 2.0, 3.0])
        out = lag(s, 2)
        y, x = align(s, out)
        assert y.start == Q0 + 2 and vals(x) == [1.0]

    @given(value_lists, st.integers(1, 5))
    def test_composition(self, values, k):
        s = series(values)
        assert lag(lag(s, k), 1) == lag(s, k + 1)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            lag(series([1.0, 2.0]), 0)


class TestInflationProxy:
    def test_log_ratio(self):
        out = inflation_proxy(series([100.0, 101.0]), 0.0)
        assert out.values[0] == pytest.approx(math.log(101 / 100), abs=1e-15)
        assert out.values[0] == pytest.approx(0.00995, abs=5e-6)

    def test_constant_cpi(self):
        assert vals(inflation_proxy(series([120.0] * 5))) == [0.0] * 4

    @given(st.floats(1e-2, 1e3), st.floats(0.5, 2.0), st.integers(3, 30))
    def test_constant_ratio_gives_constant_output(self, level, ratio, n):
        s = series(level * ratio ** np.arange(n))
        out = inflation_proxy(s, 0.0)
        np.testing.assert_allclose(out.values, math.log(ratio), atol=1e-10)


class TestDescribe:
    def test_constant(self):
        assert describe(series([1.0, 1.0, 1.0])) == (1.0, 0.0)

    def test_sample_std(self):
        mean, std = describe(series([0.0, 2.0]))
        assert mean == 1.0 and std == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_ignores_missing(self):
        assert describe(series([0.0, None, 2.0]))[0] == 1.0

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            describe(series([1.0, None]))

    @given(st.lists(finite, min_size=2, max_size=50))
    def test_self_concatenation_preserves_mean(self, values):
        m1, _ = describe(values)
        m2, _ = describe(values + values)
        assert m2 == pytest.approx(m1, abs=1e-9)


class TestAlignment:
    @given(value_lists, value_lists, st.integers(-5, 5))
    def test_binary_ops_on_present_intersection(self, a, b, offset):
        sa = series(a)
        sb = series(b, Q0 + offset)
        lo, hi = max(sa.start, sb.start), min(sa.end, sb.end)
        if hi < lo:
            with pytest.raises(SeriesTooShort):
                sa - sb
            return
        diff = sa - sb
        assert diff.start == lo and diff.end == hi
        for i, q in enumerate(diff.quarters):
            both = not (math.isnan(sa.at(q)) or math.isnan(sb.at(q)))
            assert (not math.isnan(diff.values[i])) == both
            if both:
                assert diff.values[i] == sa.at(q) - sb.at(q)

    def test_values_are_read_only(self):
        s = series([1.0, 2.0])
        with pytest.raises(ValueError):
            s.values[0] = 3.0

    def test_longest_run(self):
        s = series([None, 1.0, 2.0, None, 3.0, 4.0, 5.0, None])
        run = s.longest_run()
        assert run.start == Q0 + 4 and vals(run) == [3.0, 4.0, 5.0]
