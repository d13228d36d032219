import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etmvol.errors import AlignmentError, ConfigurationError, DomainError, ValidityError
from etmvol.score import (
    default_alpha_grid,
    dm_test,
    loss_minimizing_constant,
    qcrps,
    qcrps_terms,
    qcrps_weights,
    qlike,
    qlike_terms,
    relative_loss,
    rmsfe,
    weighted_qcrps,
)


class TestRmsfe:
    def test_perfect(self):
        assert rmsfe([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_hand_value(self):
        assert rmsfe([1.0, 2.0], [2.0, 2.0]) == pytest.approx(np.sqrt(0.5))

    def test_symmetry(self):
        h = [1.0, 3.0, 0.5]
        f = [2.0, 2.5, 1.0]
        assert rmsfe(h, f) == pytest.approx(rmsfe(f, h))

    def test_alignment(self):
        with pytest.raises(AlignmentError):
            rmsfe([1.0], [1.0, 2.0])


class TestQlike:
    def test_perfect(self):
        assert qlike([1.0], [1.0]) == 0.0

    def test_asymmetry_values(self):
        under = qlike([1.0], [0.5])
        over = qlike([1.0], [2.0])
        assert under == pytest.approx(2.0 - np.log(2.0) - 1.0, abs=1e-12)
        assert over == pytest.approx(0.5 + np.log(2.0) - 1.0, abs=1e-12)
        assert under > over

    def test_scale_invariance(self):
        h = np.array([1.0, 2.0, 5.0])
        f = np.array([1.5, 1.0, 4.0])
        assert qlike(3.7 * h, 3.7 * f) == pytest.approx(qlike(h, f), rel=1e-12)

    def test_zero_proxy_floored(self):
        vals = qlike_terms([0.0], [1.0])
        assert np.isfinite(vals[0])

    def test_nonpositive_forecast(self):
        with pytest.raises(DomainError):
            qlike([1.0], [0.0])


class TestQcrps:
    def test_single_level_hand_value(self):
        assert qcrps_terms([0.5], [0.0], 1.0)[0] == pytest.approx(1.0)

    def test_degenerate_forecast_at_realized(self):
        alphas = default_alpha_grid()
        q = np.zeros(19)
        assert qcrps(alphas, q, 0.0) == 0.0

    def test_other_forecast_positive(self):
        alphas = default_alpha_grid()
        q = np.linspace(-2, 2, 19)
        assert qcrps(alphas, q, 0.5) > 0.0

    def test_brute_force_equivalence(self):
        rng = np.random.default_rng(42)
        alphas = default_alpha_grid()
        for _ in range(200):
            q = np.sort(rng.normal(0, 2, 19))
            r = rng.normal(0, 2)
            brute = sum(
                2.0 * ((r <= q[j]) - alphas[j]) * (q[j] - r) for j in range(19)
            ) / 19.0
            assert qcrps(alphas, q, r) == pytest.approx(brute, abs=1e-12)

    def test_monotone_violation(self):
        with pytest.raises(ValidityError):
            qcrps([0.25, 0.5, 0.75], [1.0, 0.5, 2.0], 0.0)

    def test_alpha_grid_validity(self):
        with pytest.raises(ValidityError):
            qcrps([0.5, 0.25], [0.0, 1.0], 0.0)


class TestWeightedQcrps:
    def test_center_weight_at_half(self):
        assert qcrps_weights([0.5], "center")[0] == pytest.approx(0.25)

    def test_tails_weight_at_half(self):
        assert qcrps_weights([0.5], "tails")[0] == 0.0

    def test_tails_weight_at_005(self):
        assert qcrps_weights([0.05], "tails")[0] == pytest.approx(0.81)

    def test_uniform_equals_unweighted(self):
        rng = np.random.default_rng(3)
        alphas = default_alpha_grid()
        q = np.sort(rng.normal(0, 1, 19))
        r = 0.3
        assert weighted_qcrps(alphas, q, r, "uniform") == qcrps(alphas, q, r)

    def test_linearity_in_constant_terms(self):
        alphas = default_alpha_grid()
        # all per-level terms equal c: realized at the median of a flat forecast
        c = 2.0
        w = qcrps_weights(alphas, "center")
        # construct terms directly: weighted mean of constant terms
        terms = np.full(19, c)
        assert (w * terms).mean() == pytest.approx(c * w.mean())

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            qcrps_weights([0.5], "middle")


class TestRelativeLoss:
    def test_equal(self):
        assert relative_loss(1.0, 1.0) == 0.0

    def test_table_convention(self):
        assert relative_loss(0.9826, 1.0) == pytest.approx(-0.0174)

    def test_doubling(self):
        assert relative_loss(2.0, 1.0) == pytest.approx(1.0)

    def test_zero_benchmark(self):
        with pytest.raises(DomainError):
            relative_loss(1.0, 0.0)


class TestDmTest:
    def test_degenerate_zero(self):
        res = dm_test(np.zeros(30))
        assert res.degenerate
        assert res.p_value == 1.0
        assert res.stars() == ""

    def test_degenerate_nonzero_mean(self):
        res = dm_test(np.full(30, 0.7))
        assert res.degenerate
        assert res.p_value == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(11)
        d = rng.normal(0.1, 1.0, 60)
        a = dm_test(d)
        b = dm_test(-d)
        assert a.statistic == pytest.approx(-b.statistic)
        assert a.p_value == pytest.approx(b.p_value)

    def test_bandwidth_and_dof(self):
        res = dm_test(np.random.default_rng(0).normal(0, 1, 60))
        assert res.bandwidth == 7
        assert res.dof == 8
        assert res.sample_size == 60

    def test_minimum_sample(self):
        with pytest.raises(DomainError):
            dm_test(np.ones(10))

    def test_power_sanity(self):
        rng = np.random.default_rng(123)
        rejections = sum(
            dm_test(rng.normal(0.5, 1.0, 60)).p_value < 0.05 for _ in range(200)
        )
        assert rejections >= 160  # > 80 percent power

    def test_stars_thresholds(self):
        rng = np.random.default_rng(5)
        d = rng.normal(1.0, 0.5, 60)
        assert dm_test(d).stars() == "**"


class TestLossMinimization:
    def test_losses_minimized_at_true_variance(self):
        # h_t = sigma^2 * chi2_1 draws; both QLIKE and MSE should be minimized
        # near sigma^2 by a constant forecast
        rng = np.random.default_rng(7)
        sigma2 = 2.5
        h = sigma2 * rng.chisquare(1, size=200_000)
        grid = np.linspace(0.5 * sigma2, 1.5 * sigma2, 201)
        best_mse = loss_minimizing_constant(lambda g: np.mean((h - g) ** 2), grid)
        best_qlike = loss_minimizing_constant(lambda g: qlike(h, np.full_like(h, g)), grid)
        assert abs(best_mse - sigma2) / sigma2 < 0.05
        assert abs(best_qlike - sigma2) / sigma2 < 0.05

    def test_proxy_robust_ranking(self):
        # two fixed forecast sequences keep their expected-loss ranking under
        # different unbiased proxies of the same true variance
        rng = np.random.default_rng(8)
        n = 200_000
        true_var = 2.0
        proxy_a = true_var * rng.chisquare(1, n)
        proxy_b = true_var * rng.chisquare(5, n) / 5.0
        good = np.full(n, 2.1)
        bad = np.full(n, 3.5)
        for proxy in (proxy_a, proxy_b):
            assert qlike(proxy, good) < qlike(proxy, bad)
            assert rmsfe(proxy, good) < rmsfe(proxy, bad)


@given(
    st.lists(st.floats(0.01, 100.0), min_size=2, max_size=40),
    st.lists(st.floats(0.01, 100.0), min_size=2, max_size=40),
)
@settings(max_examples=40, deadline=None)
def test_qlike_nonnegative(h_vals, f_vals):
    n = min(len(h_vals), len(f_vals))
    assert qlike(h_vals[:n], f_vals[:n]) >= 0.0
