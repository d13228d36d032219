"""One-step predictive distributions from retained posterior draws.

The variance point forecast is the predictive mean of exp(h_{T+1}): each
retained draw propagates its terminal log-variance one step (with one
volatility-innovation simulation per draw) and the results are averaged.
Return quantiles come from simulating one return per draw from the variant's
return equation and pooling.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, ValidityError
from .model import PosteriorDraws


def propagate_h(draws: PosteriorDraws, rng: np.random.Generator) -> np.ndarray:
    """Simulate h_{T+1} for every retained draw."""
    if draws.n_draws == 0:
        raise DomainError("no posterior draws")
    phi0 = draws.column("phi0")
    phi1 = draws.column("phi1")
    om2 = draws.column("omega2")
    h_last = draws.h[:, -1]
    mean = phi0 + phi1 * (h_last - phi0)
    var = om2.copy()
    if draws.variant == "SV2":
        if draws.h.shape[1] < 2:
            raise DomainError("SV2 propagation needs two trailing states")
        mean = mean + draws.column("phi2") * (draws.h[:, -2] - phi0)
    elif draws.variant == "SV1_L":
        # volatility innovation conditioned on the last observed return shock
        rho = draws.column("rho")
        eps = draws.returns[-1] - draws.column("mu")
        z = eps * np.exp(-np.minimum(h_last, 700.0) / 2.0)
        mean = mean + rho * np.sqrt(om2) * z
        var = om2 * (1.0 - rho**2)
    return mean + np.sqrt(var) * rng.standard_normal(draws.n_draws)


def sv_forecast_variance(draws: PosteriorDraws, seed: int = 0) -> float:
    """Predictive mean of the one-step conditional variance exp(h_{T+1})."""
    rng = np.random.default_rng(seed)
    h_next = propagate_h(draws, rng)
    return float(np.mean(np.exp(np.minimum(h_next, 700.0))))


def simulate_return_step(draws: PosteriorDraws, rng: np.random.Generator) -> np.ndarray:
    """Simulate one r_{T+1} per retained draw from the variant's return equation."""
    h_next = propagate_h(draws, rng)
    scale = np.exp(np.minimum(h_next, 700.0) / 2.0)
    mu = draws.column("mu")
    if draws.variant == "SV1_T":
        innov = rng.standard_t(draws.column("nu"))
    else:
        innov = rng.standard_normal(draws.n_draws)
    r = mu + scale * innov
    if draws.variant == "SV1_J":
        jumps = rng.random(draws.n_draws) < draws.column("kappa")
        sizes = draws.column("mu_k") + np.sqrt(draws.column("sigma_k2")) * rng.standard_normal(
            draws.n_draws
        )
        r = r + jumps * sizes
    return r


def sv_predictive_quantiles(draws: PosteriorDraws, alpha_grid, seed: int = 0) -> np.ndarray:
    """Empirical quantiles of the pooled one-step return distribution."""
    a = np.asarray(alpha_grid, dtype=float)
    if np.any(a <= 0) or np.any(a >= 1) or np.any(np.diff(a) <= 0):
        raise ValidityError("alpha grid must be strictly increasing inside (0,1)")
    rng = np.random.default_rng(seed)
    pool = simulate_return_step(draws, rng)
    return np.quantile(pool, a)
