import numpy as np
import pytest

from etmvol.errors import ValidityError
from etmvol.sv.forecast import propagate_h, simulate_return_step, sv_forecast_variance, sv_predictive_quantiles
from etmvol.sv.model import McmcSettings, PosteriorDraws, PriorSet, SvSpec
from etmvol.sv.sampler import sample_posterior
from etmvol.sv.simulate import simulate_sv


def make_draws(variant, names, params_row, h_last, n=1, T=5, returns=None):
    params = np.tile(np.asarray(params_row, float), (n, 1))
    h = np.tile(np.linspace(h_last - 0.4, h_last, T), (n, 1))
    return PosteriorDraws(
        variant=variant,
        param_names=names,
        params=params,
        h=h,
        returns=np.zeros(T) if returns is None else np.asarray(returns, float),
        accept_rates={},
        seed=0,
        prior=PriorSet(),
        mcmc=McmcSettings(1, 1, 1, 0),
    )


class TestVarianceForecast:
    def test_deterministic_propagation(self):
        # omega = 0, phi1 = 0: forecast is exactly exp(phi0)
        d = make_draws("SV1", ("mu", "phi0", "phi1", "omega2"), [0.0, 1.3, 0.0, 0.0], h_last=2.0, n=50)
        assert sv_forecast_variance(d, seed=3) == pytest.approx(np.exp(1.3))

    def test_identity_propagation(self):
        # single draw, phi0 = 0, phi1 = 1 boundary input, omega = 0: carries h_T
        d = make_draws("SV1", ("mu", "phi0", "phi1", "omega2"), [0.0, 0.0, 1.0, 0.0], h_last=np.log(4.0))
        assert sv_forecast_variance(d, seed=1) == pytest.approx(4.0)

    def test_monte_carlo_rate(self, sv1_posterior):
        # doubling the number of draws roughly halves the forecast standard error
        def forecast_se(draws_subset, n_rep=40):
            vals = [sv_forecast_variance(draws_subset, seed=s) for s in range(n_rep)]
            return np.std(vals)

        half = PosteriorDraws(
            variant=sv1_posterior.variant,
            param_names=sv1_posterior.param_names,
            params=sv1_posterior.params[:1000],
            h=sv1_posterior.h[:1000],
            returns=sv1_posterior.returns,
            accept_rates={},
            seed=0,
            prior=sv1_posterior.prior,
            mcmc=sv1_posterior.mcmc,
        )
        quarter = PosteriorDraws(
            variant=sv1_posterior.variant,
            param_names=sv1_posterior.param_names,
            params=sv1_posterior.params[:250],
            h=sv1_posterior.h[:250],
            returns=sv1_posterior.returns,
            accept_rates={},
            seed=0,
            prior=sv1_posterior.prior,
            mcmc=sv1_posterior.mcmc,
        )
        ratio = forecast_se(quarter) / forecast_se(half)
        assert 1.4 < ratio < 2.9  # sqrt(4) = 2 up to Monte Carlo noise

    def test_positive(self, sv1_posterior):
        assert sv_forecast_variance(sv1_posterior, seed=9) > 0.0

    def test_sv2_uses_two_lags(self):
        names = ("mu", "phi0", "phi1", "phi2", "omega2")
        d = make_draws("SV2", names, [0.0, 0.0, 0.0, 1.0, 0.0], h_last=0.0, T=6)
        # h path ends [-?, 0]; with phi1=0, phi2=1, omega=0: h_next = h_{T-1}
        h_prev = d.h[0, -2]
        assert sv_forecast_variance(d, seed=1) == pytest.approx(np.exp(h_prev))

    def test_leverage_conditional_mean(self):
        names = ("mu", "phi0", "phi1", "omega2", "rho")
        # rho = 1, omega2 = 0.04: eta is deterministic given the last shock
        d = make_draws("SV1_L", names, [0.0, 0.0, 0.0, 0.04, 1.0], h_last=0.0, T=4,
                       returns=[0.0, 0.0, 0.0, 1.5])
        # z = exp(0)*1.5; h_next = 0 + 0 + 1 * 0.2 * 1.5, var 0
        assert sv_forecast_variance(d, seed=2) == pytest.approx(np.exp(0.3))


class TestPredictiveQuantiles:
    def test_median_near_mu(self, sv1_posterior):
        q = sv_predictive_quantiles(sv1_posterior, [0.5], seed=11)
        mu = sv1_posterior.column("mu").mean()
        spread = sv_predictive_quantiles(sv1_posterior, [0.25, 0.75], seed=11)
        assert abs(q[0] - mu) < 0.5 * (spread[1] - spread[0])

    def test_monotone(self, sv1_posterior):
        q = sv_predictive_quantiles(sv1_posterior, [0.25, 0.5, 0.75], seed=13)
        assert q[0] <= q[1] <= q[2]

    def test_heavy_tail_ordering(self):
        names = ("mu", "phi0", "phi1", "omega2", "nu")
        heavy = make_draws("SV1_T", names, [0.0, 0.0, 0.0, 0.0, 3.0], h_last=0.0, n=4000)
        light = make_draws("SV1_T", names, [0.0, 0.0, 0.0, 0.0, 30.0], h_last=0.0, n=4000)
        qh = sv_predictive_quantiles(heavy, [0.05, 0.95], seed=17)
        ql = sv_predictive_quantiles(light, [0.05, 0.95], seed=17)
        assert qh[1] - qh[0] > ql[1] - ql[0]

    def test_jump_widens_tails(self):
        base_names = ("mu", "phi0", "phi1", "omega2", "kappa", "mu_k", "sigma_k2")
        no_jump = make_draws("SV1_J", base_names, [0.0, 0.0, 0.0, 0.0, 1e-12, 0.0, 1.0], 0.0, n=4000)
        jumpy = make_draws("SV1_J", base_names, [0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 25.0], 0.0, n=4000)
        qn = sv_predictive_quantiles(no_jump, [0.05, 0.95], seed=19)
        qj = sv_predictive_quantiles(jumpy, [0.05, 0.95], seed=19)
        assert qj[1] - qj[0] > qn[1] - qn[0]

    def test_invalid_grid(self, sv1_posterior):
        with pytest.raises(ValidityError):
            sv_predictive_quantiles(sv1_posterior, [0.5, 0.25], seed=1)
        with pytest.raises(ValidityError):
            sv_predictive_quantiles(sv1_posterior, [0.0, 0.5], seed=1)
