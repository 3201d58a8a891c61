import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncpc.exceptions import DegenerateRegression, SeriesTooShort
from ncpc.series import Quarter, QuarterlySeries
from ncpc.unitroot import adf, long_run_variance, mackinnon_p, newey_west_auto_bandwidth, pp, sic


def ar1(phi, seed, n):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n)
    x = np.zeros(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = phi * x[t - 1] + e[t]
    return x


def ar2(seed=99, n=160):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=n)
    x = np.zeros(n)
    for t in range(2, n):
        x[t] = 1.2 * x[t - 1] - 0.3 * x[t - 2] + e[t]
    return x


def pp_oracle(x, bandwidth):
    """Straightforward Phillips-Perron Z(t) with explicit loops."""
    y = x[1:] - x[:-1]
    X = np.column_stack([np.ones(len(y)), x[:-1]])
    n = len(y)
    b, *_ = np.linalg.lstsq(X, y, rcond=None)
    u = y - X @ b
    s2 = sum(v * v for v in u) / (n - 2)
    cov = s2 * np.linalg.inv(X.T @ X)
    se = math.sqrt(cov[1, 1])
    t = b[1] / se
    g0 = sum(v * v for v in u) / n
    lrv = g0
    for j in range(1, bandwidth + 1):
        gj = sum(u[i] * u[i - j] for i in range(j, n)) / n
        lrv += 2 * (1 - j / (bandwidth + 1)) * gj
    return math.sqrt(g0 / lrv) * t - (lrv - g0) * n * se / (2 * math.sqrt(lrv) * math.sqrt(s2))


class TestSic:
    def test_example(self):
        assert sic(np.full(100, 1.0), 2, 100) == pytest.approx(0.0921, abs=5e-5)

    def test_doubling_rss(self):
        e = np.random.default_rng(0).normal(size=50)
        assert sic(e * math.sqrt(2), 3, 50) - sic(e, 3, 50) == pytest.approx(math.log(2), abs=1e-12)

    def test_extra_parameter(self):
        e = np.random.default_rng(0).normal(size=50)
        assert sic(e, 4, 50) - sic(e, 3, 50) == pytest.approx(math.log(50) / 50, abs=1e-12)

    def test_needs_more_obs(self):
        with pytest.raises(ValueError):
            sic(np.ones(3), 3, 3)


class TestMacKinnon:
    def test_known_points(self):
        # 5% asymptotic critical value of the constant-only case is about -2.86
        assert mackinnon_p(-2.86) == pytest.approx(0.05, abs=0.003)
        assert mackinnon_p(-3.43) == pytest.approx(0.01, abs=0.002)
        assert mackinnon_p(3.0) == 1.0 and mackinnon_p(-20.0) == 0.0

    @given(st.floats(-25, 5), st.floats(-25, 5))
    def test_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert mackinnon_p(lo) <= mackinnon_p(hi)
        assert 0.0 <= mackinnon_p(lo) <= 1.0

    def test_matches_statsmodels(self):
        sm = pytest.importorskip("statsmodels.tsa.adfvalues")
        for tau in np.linspace(-6, 2, 33):
            assert mackinnon_p(tau) == pytest.approx(sm.mackinnonp(tau, "c", 1), abs=1e-12)


class TestADF:
    # frozen from an independent ADF implementation (statsmodels adfuller, autolag="BIC", maxlag=13)
    CASES = [
        (lambda: ar1(0.5, 20240501, 200), -7.929038528054063, 3.553881736660473e-12, 0, 199),
        (lambda: ar1(0.9, 7, 150), -2.8009675756853496, 0.058135689635614794, 0, 149),
        (lambda: ar1(0.97, 11, 129), -1.8894367586879142, 0.33704659332413206, 0, 128),
        (ar2, -3.2369645890014747, 0.017942279965918278, 1, 158),
    ]

    @pytest.mark.parametrize("make,stat,p,lags,nobs", CASES)
    def test_reference_oracle(self, make, stat, p, lags, nobs):
        r = adf(make())
        assert abs(r.p_value - p) <= 0.005
        assert r.statistic == pytest.approx(stat, abs=1e-8)
        assert (r.lags_or_bandwidth, r.nobs) == (lags, nobs)

    def test_live_statsmodels(self):
        st_ = pytest.importorskip("statsmodels.tsa.stattools")
        x = ar1(0.8, 5, 140)
        ref = st_.adfuller(x, maxlag=13, regression="c", autolag="BIC")
        r = adf(x)
        assert abs(r.p_value - ref[1]) <= 0.005
        assert r.lags_or_bandwidth == ref[2] and r.nobs == ref[3]

    def test_fixed_lags(self):
        x = ar2()
        r = adf(x, lags=3)
        assert r.lags_or_bandwidth == 3 and r.nobs == len(x) - 4

    def test_constant_series(self):
        with pytest.raises(DegenerateRegression):
            adf(np.full(60, 3.0))

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            adf(np.arange(20.0) ** 0.5)

    def test_quarterly_series_uses_longest_run(self):
        x = ar1(0.7, 1, 120)
        s = QuarterlySeries("AU", "x", Quarter(1980, 1), [None] * 3 + list(x) + [None])
        assert adf(s) == adf(x)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-100, 100))
    def test_shift_invariance_and_determinism(self, seed, c):
        x = ar1(0.8, seed, 100)
        a, b = adf(x), adf(x + c)
        assert a == adf(x.copy())
        assert a.lags_or_bandwidth == b.lags_or_bandwidth
        assert b.statistic == pytest.approx(a.statistic, abs=1e-6)
        assert b.p_value == pytest.approx(a.p_value, abs=1e-6)


class TestPP:
    def test_white_noise_bandwidth(self):
        x = np.random.default_rng(144).normal(size=145)
        r = pp(x)
        assert r.nobs == 144 and r.lags_or_bandwidth == 4

    @pytest.mark.parametrize("bandwidth", [0, 1, 4, 7])
    def test_independent_oracle(self, bandwidth):
        x = np.random.default_rng(144).normal(size=145).cumsum() * 0.1 + ar1(0.6, 2, 145)
        assert pp(x, bandwidth).statistic == pytest.approx(pp_oracle(x, bandwidth), abs=1e-6)

    def test_reduces_to_adf_l0(self):
        for seed in range(10):
            x = ar1(0.9, seed, 100)
            assert abs(pp(x, 0).statistic - adf(x, lags=0).statistic) <= 1e-8

    def test_auto_bandwidth(self):
        x = ar1(0.6, 3, 130)
        r = pp(x, bandwidth_method="auto")
        e = np.diff(x)
        assert r.lags_or_bandwidth >= 0
        assert newey_west_auto_bandwidth(e) >= 0
        with pytest.raises(ValueError):
            pp(x, bandwidth_method="magic")

    def test_long_run_variance(self):
        e = np.array([1.0, -1.0, 1.0, -1.0])
        assert long_run_variance(e, 0) == 1.0
        assert long_run_variance(e, 1) == pytest.approx(1.0 + 2 * 0.5 * (-3 / 4))

    def test_errors(self):
        with pytest.raises(SeriesTooShort):
            pp(np.arange(9.0))
        with pytest.raises(DegenerateRegression):
            pp(np.full(30, 1.0))
        with pytest.raises(ValueError):
            pp(ar1(0.5, 1, 50), -1)

    def test_result_fields(self):
        r = pp(ar1(0.5, 1, 50))
        assert r.test == "pp" and r.deterministic == "intercept" and 0 <= r.p_value <= 1
