import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etmvol.errors import CoverageError, DataGapError, DomainError
from etmvol.ingest import (
    CpiSeries,
    PriceSeries,
    adjusted_squared_range,
    daily_log_returns,
    deflate,
    interpolate_cpi,
    monthly_real_price,
    monthly_returns,
    realized_volatility,
)


def price_series(dates, prices, name="test"):
    return PriceSeries(name, np.array(dates, dtype="datetime64[D]"), np.array(prices, float))


def cpi_series(months, levels):
    return CpiSeries(np.array(months, dtype="datetime64[M]"), np.array(levels, float))


class TestInterpolateCpi:
    def test_midpoint_between_anchors(self):
        cpi = cpi_series(["2020-06", "2020-07"], [100.0, 102.0])
        # anchors: Jun 15 and Jul 15, midpoint Jun 30
        out = interpolate_cpi(cpi, ["2020-06-30"])
        assert out[0] == pytest.approx(101.0)

    def test_anchor_date_returns_level(self):
        cpi = cpi_series(["2020-06", "2020-07"], [100.0, 102.0])
        assert interpolate_cpi(cpi, ["2020-06-15"])[0] == pytest.approx(100.0)
        assert interpolate_cpi(cpi, ["2020-07-15"])[0] == pytest.approx(102.0)

    def test_quarter_into_second_interval(self):
        cpi = cpi_series(["2020-06", "2020-07", "2020-08"], [100.0, 102.0, 104.0])
        # second interval: Jul 15 -> Aug 15 (31 days); a quarter in is day 7.75
        anchors = np.array(["2020-07-15", "2020-08-15"], dtype="datetime64[D]")
        span = (anchors[1] - anchors[0]).astype(int)
        assert span % 4 == 3  # 31 days; use exact fractional target via day arithmetic
        target = anchors[0] + span // 4
        out = interpolate_cpi(cpi, [target])
        expected = 102.0 + 2.0 * (span // 4) / span
        assert out[0] == pytest.approx(expected)
        # and the clean quarter point on a 28-day interval
        cpi2 = cpi_series(["2021-01", "2021-02", "2021-03"], [100.0, 102.0, 104.0])
        out2 = interpolate_cpi(cpi2, ["2021-02-22"])  # Feb 15 + 7 = quarter of 28 days
        assert out2[0] == pytest.approx(102.5)

    def test_outside_coverage_raises(self):
        cpi = cpi_series(["2020-06", "2020-07"], [100.0, 102.0])
        with pytest.raises(CoverageError, match="2020-08-01"):
            interpolate_cpi(cpi, ["2020-08-01"])


class TestDeflate:
    def test_halving(self):
        p = price_series(["2020-06-01"], [100.0])
        out = deflate(p, np.array([2.0]), base_index=1.0)
        assert out.prices[0] == pytest.approx(50.0)

    def test_constant_cpi_identity(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 110.0])
        out = deflate(p, np.array([100.0, 100.0]))
        np.testing.assert_allclose(out.prices, p.prices)

    def test_ratio(self):
        p = price_series(["2020-06-01"], [250.0])
        out = deflate(p, np.array([125.0]), base_index=100.0)
        assert out.prices[0] == pytest.approx(200.0)

    def test_coverage_mismatch(self):
        p = price_series(["2020-06-01", "2020-06-02"], [1.0, 2.0])
        with pytest.raises(CoverageError):
            deflate(p, np.array([100.0]))


class TestMonthlyAggregation:
    def test_mean(self):
        p = price_series(["2020-06-01", "2020-06-02", "2020-06-03"], [10.0, 20.0, 30.0])
        out = monthly_real_price(p)
        assert out.values[0] == pytest.approx(20.0)

    def test_single_observation(self):
        p = price_series(["2020-06-01"], [7.5])
        assert monthly_real_price(p).values[0] == pytest.approx(7.5)

    def test_constant(self):
        dates = np.arange("2020-06-01", "2020-06-20", dtype="datetime64[D]")
        p = price_series(dates, np.full(len(dates), 7.0))
        assert monthly_real_price(p).values[0] == pytest.approx(7.0)

    def test_gap_month_raises(self):
        p = price_series(["2020-06-01", "2020-08-01"], [1.0, 2.0])
        with pytest.raises(DataGapError):
            monthly_real_price(p)


class TestDailyLogReturns:
    def test_no_change(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0])
        assert daily_log_returns(p).returns[0] == 0.0

    def test_one_percent(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0 * np.exp(0.01)])
        assert daily_log_returns(p).returns[0] == pytest.approx(1.0)

    def test_halving_price(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 50.0])
        assert daily_log_returns(p).returns[0] == pytest.approx(100.0 * np.log(0.5))

    def test_month_tag_is_return_date(self):
        p = price_series(["2020-06-30", "2020-07-01"], [100.0, 101.0])
        r = daily_log_returns(p)
        assert str(r.months[0]) == "2020-07"


class TestRealizedVolatility:
    def test_hand_value(self):
        p = price_series(
            ["2020-05-29", "2020-06-01", "2020-06-02", "2020-06-03"],
            np.exp(np.cumsum([0.0, 0.01, -0.01, 0.02])),
        )
        rv = realized_volatility(daily_log_returns(p))
        # June returns are [1, -1, 2] percent
        assert rv.values[-1] == pytest.approx(252.0 * np.mean([1.0, 1.0, 4.0]))

    def test_zero_returns(self):
        dates = np.arange("2020-06-01", "2020-06-10", dtype="datetime64[D]")
        p = price_series(dates, np.full(len(dates), 50.0))
        rv = realized_volatility(daily_log_returns(p))
        assert rv.values[0] == 0.0

    def test_single_return(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0 * np.exp(0.03)])
        rv = realized_volatility(daily_log_returns(p))
        assert rv.values[0] == pytest.approx(252.0 * 9.0)


class TestAdjustedSquaredRange:
    def test_constant_prices(self):
        dates = np.arange("2020-06-01", "2020-06-15", dtype="datetime64[D]")
        p = price_series(dates, np.full(len(dates), 30.0))
        assert adjusted_squared_range(p).values[0] == 0.0

    def test_hand_value(self):
        p = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0 * np.exp(0.10)])
        out = adjusted_squared_range(p)
        expected = 1200.0 * (0.10 / (2.0 * np.sqrt(np.log(2.0)))) ** 2
        assert out.values[0] == pytest.approx(expected, rel=1e-10)
        assert out.values[0] == pytest.approx(4.3280, abs=5e-4)

    def test_quadratic_scaling(self):
        p1 = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0 * np.exp(0.10)])
        p2 = price_series(["2020-06-01", "2020-06-02"], [100.0, 100.0 * np.exp(0.20)])
        v1 = adjusted_squared_range(p1).values[0]
        v2 = adjusted_squared_range(p2).values[0]
        assert v2 == pytest.approx(4.0 * v1)
        assert v2 == pytest.approx(17.3121, abs=5e-3)


class TestValidation:
    def test_nonpositive_price(self):
        with pytest.raises(DomainError):
            price_series(["2020-06-01"], [-1.0])

    def test_decreasing_dates(self):
        with pytest.raises(DomainError):
            price_series(["2020-06-02", "2020-06-01"], [1.0, 2.0])

    def test_cpi_gap(self):
        with pytest.raises(DomainError):
            cpi_series(["2020-06", "2020-08"], [100.0, 101.0])


@st.composite
def daily_price_paths(draw):
    n = draw(st.integers(min_value=25, max_value=60))
    steps = draw(
        st.lists(st.floats(-0.08, 0.08, allow_nan=False), min_size=n, max_size=n)
    )
    return np.exp(np.cumsum(steps)) * 100.0


class TestInvariants:
    @given(prices=daily_price_paths(), scale=st.floats(0.1, 10.0))
    @settings(max_examples=25, deadline=None)
    def test_scale_invariance(self, prices, scale):
        dates = np.arange("2020-01-01", "2020-01-01", dtype="datetime64[D]")
        dates = np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-01-01") + len(prices))
        base = price_series(dates, prices)
        scaled = price_series(dates, prices * scale)
        np.testing.assert_allclose(
            daily_log_returns(base).returns, daily_log_returns(scaled).returns, atol=1e-9
        )
        np.testing.assert_allclose(
            realized_volatility(daily_log_returns(base)).values,
            realized_volatility(daily_log_returns(scaled)).values,
            rtol=1e-9, atol=1e-9,
        )
        np.testing.assert_allclose(
            adjusted_squared_range(base).values,
            adjusted_squared_range(scaled).values,
            rtol=1e-9, atol=1e-9,
        )

    @given(prices=daily_price_paths())
    @settings(max_examples=25, deadline=None)
    def test_proxies_nonnegative(self, prices):
        dates = np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-01-01") + len(prices))
        p = price_series(dates, prices)
        assert np.all(realized_volatility(daily_log_returns(p)).values >= 0)
        assert np.all(adjusted_squared_range(p).values >= 0)

    def test_constant_ratio_cpi_is_pure_rescaling(self):
        dates = np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-03-20"))
        rng = np.random.default_rng(5)
        prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.01, len(dates))))
        p = price_series(dates, prices)
        real = deflate(p, np.full(len(dates), 125.0), base_index=100.0)
        np.testing.assert_allclose(
            daily_log_returns(real).returns, daily_log_returns(p).returns, atol=1e-10
        )

    def test_returns_roundtrip(self):
        dates = np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-02-15"))
        rng = np.random.default_rng(6)
        prices = 40.0 * np.exp(np.cumsum(rng.normal(0, 0.02, len(dates))))
        p = price_series(dates, prices)
        r = daily_log_returns(p)
        rebuilt = prices[0] * np.exp(np.cumsum(r.returns) / 100.0)
        back = price_series(dates, np.concatenate([[prices[0]], rebuilt]))
        np.testing.assert_allclose(
            daily_log_returns(back).returns, r.returns, rtol=1e-10, atol=1e-10
        )

    def test_reordering_within_month_invariance(self):
        dates = np.arange(np.datetime64("2020-01-01"), np.datetime64("2020-01-21"))
        rng = np.random.default_rng(7)
        prices = 100.0 * np.exp(np.cumsum(rng.normal(0, 0.02, len(dates))))
        p = price_series(dates, prices)
        rv = realized_volatility(daily_log_returns(p))
        # permuting the return values within the month leaves the RV unchanged
        r = daily_log_returns(p).returns.copy()
        perm = rng.permutation(len(r))
        assert rv.values[0] == pytest.approx(252.0 * np.mean(r[perm] ** 2))
        # permuting prices within the month leaves the range unchanged
        rg = adjusted_squared_range(p)
        shuffled = prices.copy()
        rng.shuffle(shuffled)
        logs = np.log(shuffled)
        expected = 1200.0 * ((logs.max() - logs.min()) / (2 * np.sqrt(np.log(2)))) ** 2
        assert rg.values[0] == pytest.approx(expected)


def test_monthly_returns_percent_log():
    p = price_series(["2020-06-01", "2020-07-01"], [100.0, 110.0])
    mp = monthly_real_price(p)
    mr = monthly_returns(mp)
    assert mr.values[0] == pytest.approx(100.0 * np.log(1.1))
    assert len(mr) == len(mp) - 1
