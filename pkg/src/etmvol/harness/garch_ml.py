"""Bayesian marginal likelihood for the GARCH benchmark.

The point-forecasting benchmark is fit by maximum likelihood, but the
in-sample comparison table reports marginal likelihoods, so the benchmark
gets one too: a documented weakly informative prior over the GARCH
parameters and a Laplace-calibrated importance-sampling estimate over the
same unconstrained parameterization the optimizer uses.  The GARCH
likelihood needs no latent integration, so this is plain parameter-space
importance sampling.
"""

from __future__ import annotations

import numpy as np
from scipy import special, stats

from ..garch import STATIONARITY_CAP, GarchParams, estimate_garch, gaussian_log_likelihood
from ..sv.marglik import MlEstimate, StudentTProposal, combine_importance_weights

# Prior: mu ~ N(0, 100); alpha0 ~ InverseGamma(2.5, 2.5); (alpha1, beta1)
# uniform over the stationary simplex {alpha1 > 0, beta1 >= 0, alpha1 + beta1 < 1}.
GARCH_PRIOR = {"mu_var": 100.0, "alpha0_shape": 2.5, "alpha0_scale": 2.5}


def _unpack_batch(u: np.ndarray):
    """Vectorized transformed->natural mapping with log |d theta / d u|."""
    mu = u[:, 0]
    a0 = np.exp(u[:, 1])
    pers = STATIONARITY_CAP * special.expit(u[:, 2])
    share = special.expit(u[:, 3])
    a1 = pers * share
    b1 = pers * (1.0 - share)
    # d a0/du1 = a0; d(pers)/du2 = pers*(1-pers/CAP); d share/du3 = share(1-share)
    # (alpha1, beta1) <- (pers, share) has Jacobian determinant pers
    jac = (
        u[:, 1]
        + np.log(pers)
        + np.log1p(-pers / STATIONARITY_CAP)
        + np.log(share)
        + np.log1p(-share)
        + np.log(pers)
    )
    return mu, a0, a1, b1, jac


def _log_prior(mu, a0, a1, b1) -> np.ndarray:
    out = stats.norm.logpdf(mu, 0.0, np.sqrt(GARCH_PRIOR["mu_var"]))
    sh, sc = GARCH_PRIOR["alpha0_shape"], GARCH_PRIOR["alpha0_scale"]
    out = out + sh * np.log(sc) - special.gammaln(sh) - (sh + 1.0) * np.log(a0) - sc / a0
    inside = (a1 > 0) & (b1 >= 0) & (a1 + b1 < 1.0)
    # uniform over the stationary simplex: area 1/2
    return np.where(inside, out + np.log(2.0), -np.inf)


def garch_log_ml(returns, n_importance_draws: int = 20000, seed: int = 0) -> MlEstimate:
    """Importance-sampling log marginal likelihood under the documented prior."""
    r = np.asarray(returns, dtype=float)
    rng = np.random.default_rng(seed)
    fit = estimate_garch(r)
    p = fit.params
    from ..garch import _pack  # same transform the optimizer uses

    center = _pack(p.mu, p.alpha0, max(p.alpha1, 1e-8), max(p.beta1, 1e-8))

    def neg_log_post(u):
        mu, a0, a1, b1, jac = _unpack_batch(u[None, :])
        lp = _log_prior(mu, a0, a1, b1)[0] + jac[0]
        if not np.isfinite(lp):
            return 1e12
        ll = gaussian_log_likelihood(GarchParams(mu[0], a0[0], max(a1[0], 1e-300), b1[0]), r)
        return -(ll + lp)

    # numerical Hessian of the log posterior at the packed optimum
    hess = _numeric_hessian(neg_log_post, center)
    try:
        cov = np.linalg.inv(hess)
        cov = (cov + cov.T) / 2.0
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        cov = np.eye(4) * 0.1
    draws = rng.multivariate_normal(center, cov, size=2000)
    proposal = StudentTProposal.fit(draws, df=8.0)
    u = proposal.sample(n_importance_draws, rng)
    log_q = proposal.logpdf(u)
    mu, a0, a1, b1, jac = _unpack_batch(u)
    log_p = _log_prior(mu, a0, a1, b1)
    loglik = np.full(len(u), -np.inf)
    ok = np.isfinite(log_p)
    for i in np.nonzero(ok)[0]:
        loglik[i] = gaussian_log_likelihood(
            GarchParams(mu[i], a0[i], max(a1[i], 1e-300), b1[i]), r
        )
    return combine_importance_weights(loglik + log_p + jac - log_q)


def _numeric_hessian(f, x0: np.ndarray, eps: float = 1e-4) -> np.ndarray:
    n = x0.size
    hess = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = eps
            ej[j] = eps
            fpp = f(x0 + ei + ej)
            fpm = f(x0 + ei - ej)
            fmp = f(x0 - ei + ej)
            fmm = f(x0 - ei - ej)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * eps * eps)
    return hess
