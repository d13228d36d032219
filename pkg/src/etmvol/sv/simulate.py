"""Forward simulation of the SV variants, with stationary initial conditions."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, DomainError
from .model import PriorSet


def simulate_sv(variant: str, params: dict, T: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Simulate (returns, log-variance path) from the given variant.

    ``params`` uses the sampler's parameter names (mu, phi0, phi1, omega2,
    plus phi2 / nu / rho / kappa, mu_k, sigma_k2 as the variant needs).
    """
    rng = np.random.default_rng(seed)
    mu = params["mu"]
    phi0 = params["phi0"]
    phi1 = params["phi1"]
    om2 = params["omega2"]
    om = np.sqrt(om2)
    if T < 2:
        raise DomainError("need T >= 2")

    if variant == "SV2":
        phi2 = params["phi2"]
        if not _ar2_stationary(phi1, phi2):
            raise DomainError("(phi1, phi2) outside the stationary triangle")
        h = np.empty(T)
        g0, g1 = _ar2_gammas(phi1, phi2, om2)
        cov = np.array([[g0, g1], [g1, g0]])
        h01 = phi0 + np.linalg.cholesky(cov) @ rng.standard_normal(2)
        h[0], h[1] = h01
        eta = om * rng.standard_normal(T)
        for t in range(2, T):
            h[t] = phi0 + phi1 * (h[t - 1] - phi0) + phi2 * (h[t - 2] - phi0) + eta[t]
        r = mu + np.exp(h / 2.0) * rng.standard_normal(T)
        return r, h

    if abs(phi1) >= 1.0:
        raise DomainError("|phi1| must be below 1")
    v1 = om2 / (1.0 - phi1**2)

    if variant == "SV1_L":
        rho = params["rho"]
        h = np.empty(T)
        h[0] = phi0 + np.sqrt(v1) * rng.standard_normal()
        z = rng.standard_normal(T)
        u = rng.standard_normal(T)
        r = np.empty(T)
        for t in range(T):
            r[t] = mu + np.exp(h[t] / 2.0) * z[t]
            if t + 1 < T:
                eta = om * (rho * z[t] + np.sqrt(1.0 - rho**2) * u[t + 1])
                h[t + 1] = phi0 + phi1 * (h[t] - phi0) + eta
        return r, h

    # remaining variants share the AR(1) volatility path
    h = np.empty(T)
    h[0] = phi0 + np.sqrt(v1) * rng.standard_normal()
    eta = om * rng.standard_normal(T)
    for t in range(1, T):
        h[t] = phi0 + phi1 * (h[t - 1] - phi0) + eta[t]

    if variant == "SV1":
        r = mu + np.exp(h / 2.0) * rng.standard_normal(T)
    elif variant == "SV1_T":
        nu = params["nu"]
        r = mu + np.exp(h / 2.0) * rng.standard_t(nu, T)
    elif variant == "SV1_J":
        kappa, mu_k, sigk2 = params["kappa"], params["mu_k"], params["sigma_k2"]
        q = rng.random(T) < kappa
        k = mu_k + np.sqrt(sigk2) * rng.standard_normal(T)
        r = mu + q * k + np.exp(h / 2.0) * rng.standard_normal(T)
    else:
        raise ConfigurationError(f"unknown variant {variant!r}")
    return r, h


def draw_from_prior(variant: str, priors: PriorSet, rng: np.random.Generator) -> dict:
    """Draw one parameter set from the prior (used by calibration checks)."""
    params = {
        "mu": rng.normal(priors.mu_mean, np.sqrt(priors.mu_var)),
        "phi0": rng.normal(priors.phi0_mean, np.sqrt(priors.phi0_var)),
        "omega2": priors.omega2_scale / rng.gamma(priors.omega2_shape),
    }
    if variant == "SV2":
        while True:
            phi1 = rng.uniform(-2.0, 2.0)
            phi2 = rng.uniform(-1.0, 1.0)
            if _ar2_stationary(phi1, phi2):
                break
        params["phi1"] = phi1
        params["phi2"] = phi2
    else:
        params["phi1"] = 2.0 * rng.beta(priors.phi1_beta_a, priors.phi1_beta_b) - 1.0
    if variant == "SV1_T":
        params["nu"] = rng.uniform(priors.nu_lo, priors.nu_hi)
    if variant == "SV1_L":
        params["rho"] = rng.uniform(-1.0, 1.0)
    if variant == "SV1_J":
        params["kappa"] = rng.beta(priors.kappa_a, priors.kappa_b)
        params["mu_k"] = rng.normal(priors.mu_k_mean, np.sqrt(priors.mu_k_var))
        params["sigma_k2"] = priors.sigma_k2_scale / rng.gamma(priors.sigma_k2_shape)
    return params


def _ar2_stationary(phi1: float, phi2: float) -> bool:
    return (phi1 + phi2 < 1.0) and (phi2 - phi1 < 1.0) and (abs(phi2) < 1.0)


def _ar2_gammas(phi1: float, phi2: float, om2: float) -> tuple[float, float]:
    g0 = om2 * (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) ** 2 - phi1**2))
    g1 = phi1 * g0 / (1.0 - phi2)
    return g0, g1
