"""Marginal likelihood by importance sampling, and Bayes factor bookkeeping.

The estimator samples parameters from a multivariate Student-t fitted to the
posterior draws on an unconstrained transformation of the parameter space,
draws the latent log-variance path from the same Laplace approximation the
sampler uses, and averages the joint weights.  The numerical standard error
comes from batch means of the weights, and an effective-sample-size flag
marks estimates whose proposal fit poorly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from ..errors import ConfigurationError, DomainError
from . import _kernels
from .model import PosteriorDraws, PriorSet, SvSpec

DEFAULT_IS_DRAWS = 20000
DEFAULT_LATENT_DRAWS = 16
N_BATCHES = 20
ESS_WARN_THRESHOLD = 100.0
PROPOSAL_DF = 10.0


@dataclass(frozen=True)
class MlEstimate:
    log_ml: float
    nse: float
    n_importance_draws: int
    ess: float

    @property
    def low_ess(self) -> bool:
        return self.ess < ESS_WARN_THRESHOLD


def bayes_factor(log_ml_m: float, log_ml_0: float) -> tuple[float, str]:
    """Twice the log Bayes factor with its evidence-strength category."""
    if not (np.isfinite(log_ml_m) and np.isfinite(log_ml_0)):
        raise DomainError("log marginal likelihoods must be finite")
    two_log_bf = 2.0 * (log_ml_m - log_ml_0)
    return two_log_bf, bf_category(two_log_bf)


def bf_category(two_log_bf: float) -> str:
    if two_log_bf <= 0.0:
        return "none"
    if two_log_bf <= 2.0:
        return "weak"
    if two_log_bf <= 6.0:
        return "positive"
    if two_log_bf <= 10.0:
        return "strong"
    return "very strong"


# ---------------------------------------------------------------------------
# Generic importance-sampling machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StudentTProposal:
    """Multivariate Student-t fitted by moments to (transformed) draws."""

    mean: np.ndarray
    chol: np.ndarray  # lower Cholesky of the scale matrix
    df: float

    @classmethod
    def fit(cls, draws: np.ndarray, df: float = PROPOSAL_DF) -> "StudentTProposal":
        x = np.atleast_2d(np.asarray(draws, dtype=float))
        mean = x.mean(axis=0)
        cov = np.cov(x, rowvar=False)
        cov = np.atleast_2d(cov)
        # keep the scale matrix comfortably full rank
        cov[np.diag_indices_from(cov)] += 1e-10 + 1e-8 * np.diag(cov)
        return cls(mean=mean, chol=np.linalg.cholesky(cov), df=df)

    @property
    def dim(self) -> int:
        return self.mean.size

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        g = rng.chisquare(self.df, n) / self.df
        return self.mean + (z @ self.chol.T) / np.sqrt(g)[:, None]

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        d = self.dim
        y = np.linalg.solve(self.chol, (x - self.mean).T).T
        quad = np.sum(y**2, axis=1)
        logdet = 2.0 * np.sum(np.log(np.diag(self.chol)))
        return (
            special.gammaln((self.df + d) / 2.0)
            - special.gammaln(self.df / 2.0)
            - 0.5 * d * np.log(self.df * np.pi)
            - 0.5 * logdet
            - 0.5 * (self.df + d) * np.log1p(quad / self.df)
        )


def combine_importance_weights(log_weights: np.ndarray, n_batches: int = N_BATCHES) -> MlEstimate:
    """Turn raw log importance weights into (log ML, nse, ESS)."""
    logw = np.asarray(log_weights, dtype=float)
    n = logw.size
    if n < n_batches:
        raise DomainError(f"need at least {n_batches} importance draws")
    finite = np.isfinite(logw)
    if not finite.any():
        raise DomainError("all importance weights are zero")
    m = logw[finite].max()
    w = np.where(finite, np.exp(logw - m), 0.0)
    wbar = w.mean()
    log_ml = m + math.log(wbar)
    ess = float(w.sum() ** 2 / (w**2).sum())
    batches = np.array_split(w, n_batches)
    batch_means = np.array([b.mean() for b in batches])
    nse = float(batch_means.std(ddof=1) / math.sqrt(n_batches) / wbar)
    return MlEstimate(log_ml=float(log_ml), nse=nse, n_importance_draws=n, ess=ess)


# ---------------------------------------------------------------------------
# Parameter-space transforms (to and from the unconstrained proposal space)
# ---------------------------------------------------------------------------

def _to_unconstrained(variant: str, params: np.ndarray, priors: PriorSet) -> np.ndarray:
    p = np.atleast_2d(params).copy()
    u = p.copy()
    if variant == "SV2":
        pac1 = p[:, 2] / (1.0 - p[:, 3])
        u[:, 2] = np.arctanh(np.clip(pac1, -1 + 1e-12, 1 - 1e-12))
        u[:, 3] = np.arctanh(np.clip(p[:, 3], -1 + 1e-12, 1 - 1e-12))
        u[:, 4] = np.log(p[:, 4])
        return u
    u[:, 2] = np.arctanh(np.clip(p[:, 2], -1 + 1e-12, 1 - 1e-12))
    u[:, 3] = np.log(p[:, 3])
    if variant == "SV1_T":
        y = (p[:, 4] - priors.nu_lo) / (priors.nu_hi - priors.nu_lo)
        u[:, 4] = special.logit(np.clip(y, 1e-12, 1 - 1e-12))
    elif variant == "SV1_L":
        u[:, 4] = np.arctanh(np.clip(p[:, 4], -1 + 1e-12, 1 - 1e-12))
    elif variant == "SV1_J":
        u[:, 4] = special.logit(np.clip(p[:, 4], 1e-12, 1 - 1e-12))
        u[:, 6] = np.log(p[:, 6])
    return u


def _from_unconstrained(variant: str, u: np.ndarray, priors: PriorSet):
    """Map proposal draws back to the parameter space; returns (params, log|d theta/d u|)."""
    u = np.atleast_2d(u)
    p = u.copy()
    jac = np.zeros(u.shape[0])
    if variant == "SV2":
        pac1 = np.tanh(u[:, 2])
        pac2 = np.tanh(u[:, 3])
        p[:, 3] = pac2
        p[:, 2] = pac1 * (1.0 - pac2)
        jac += np.log1p(-pac1**2) + np.log1p(-pac2**2) + np.log(1.0 - pac2)
        p[:, 4] = np.exp(u[:, 4])
        jac += u[:, 4]
        return p, jac
    p[:, 2] = np.tanh(u[:, 2])
    jac += np.log1p(-p[:, 2] ** 2)
    p[:, 3] = np.exp(u[:, 3])
    jac += u[:, 3]
    if variant == "SV1_T":
        y = special.expit(u[:, 4])
        p[:, 4] = priors.nu_lo + (priors.nu_hi - priors.nu_lo) * y
        jac += np.log(priors.nu_hi - priors.nu_lo) + np.log(y) + np.log1p(-y)
    elif variant == "SV1_L":
        p[:, 4] = np.tanh(u[:, 4])
        jac += np.log1p(-p[:, 4] ** 2)
    elif variant == "SV1_J":
        y = special.expit(u[:, 4])
        p[:, 4] = y
        jac += np.log(y) + np.log1p(-y)
        p[:, 6] = np.exp(u[:, 6])
        jac += u[:, 6]
    return p, jac


def _log_prior(variant: str, params: np.ndarray, priors: PriorSet) -> np.ndarray:
    p = np.atleast_2d(params)
    out = stats.norm.logpdf(p[:, 0], priors.mu_mean, np.sqrt(priors.mu_var))
    out = out + stats.norm.logpdf(p[:, 1], priors.phi0_mean, np.sqrt(priors.phi0_var))
    if variant == "SV2":
        inside = (
            (p[:, 2] + p[:, 3] < 1.0) & (p[:, 3] - p[:, 2] < 1.0) & (np.abs(p[:, 3]) < 1.0)
        )
        out = out + np.where(inside, -np.log(4.0), -np.inf)
        out = out + _log_ig(p[:, 4], priors.omega2_shape, priors.omega2_scale)
        return out
    out = out + stats.beta.logpdf((p[:, 2] + 1.0) / 2.0, priors.phi1_beta_a, priors.phi1_beta_b) - np.log(2.0)
    out = out + _log_ig(p[:, 3], priors.omega2_shape, priors.omega2_scale)
    if variant == "SV1_T":
        inside = (p[:, 4] > priors.nu_lo) & (p[:, 4] < priors.nu_hi)
        out = out + np.where(inside, -np.log(priors.nu_hi - priors.nu_lo), -np.inf)
    elif variant == "SV1_L":
        inside = np.abs(p[:, 4]) < 1.0
        out = out + np.where(inside, -np.log(2.0), -np.inf)
    elif variant == "SV1_J":
        out = out + stats.beta.logpdf(p[:, 4], priors.kappa_a, priors.kappa_b)
        out = out + stats.norm.logpdf(p[:, 5], priors.mu_k_mean, np.sqrt(priors.mu_k_var))
        out = out + _log_ig(p[:, 6], priors.sigma_k2_shape, priors.sigma_k2_scale)
    return out


def _log_ig(x: np.ndarray, shape: float, scale: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = shape * np.log(scale) - special.gammaln(shape) - (shape + 1.0) * np.log(x) - scale / x
    return np.where(x > 0, out, -np.inf)


# ---------------------------------------------------------------------------
# The estimator
# ---------------------------------------------------------------------------

def estimate_log_ml(
    spec: SvSpec,
    returns,
    draws: PosteriorDraws,
    n_importance_draws: int = DEFAULT_IS_DRAWS,
    n_latent_draws: int = DEFAULT_LATENT_DRAWS,
    seed: int = 0,
) -> MlEstimate:
    """Importance-sampling log marginal likelihood for one SV variant.

    ``draws`` calibrates the parameter proposal; the t and jump mixing
    variables are integrated out analytically inside the weight kernels.
    """
    r = np.ascontiguousarray(returns, dtype=float)
    if draws.variant != spec.variant:
        raise ConfigurationError("posterior draws come from a different variant")
    rng = np.random.default_rng(seed)
    u_draws = _to_unconstrained(spec.variant, draws.params, spec.priors)
    proposal = StudentTProposal.fit(u_draws)
    u = proposal.sample(n_importance_draws, rng)
    thetas, jac = _from_unconstrained(spec.variant, u, spec.priors)
    log_q = proposal.logpdf(u)
    log_p = _log_prior(spec.variant, thetas, spec.priors)
    kernel_seed = int(rng.integers(0, 2**31 - 1))
    thetas = np.ascontiguousarray(thetas)
    if spec.variant == "SV1":
        latent = _kernels.is_latent_weights_ar1(
            0, r, thetas[:, :4], np.zeros((len(thetas), 1)), kernel_seed, n_latent_draws
        )
    elif spec.variant == "SV1_T":
        latent = _kernels.is_latent_weights_ar1(
            1, r, thetas[:, :4], np.ascontiguousarray(thetas[:, 4:5]), kernel_seed, n_latent_draws
        )
    elif spec.variant == "SV1_J":
        latent = _kernels.is_latent_weights_ar1(
            2, r, thetas[:, :4], np.ascontiguousarray(thetas[:, 4:7]), kernel_seed, n_latent_draws
        )
    elif spec.variant == "SV2":
        latent = _kernels.is_latent_weights_ar2(r, thetas[:, :5], kernel_seed, n_latent_draws)
    else:
        latent = _kernels.is_latent_weights_leverage(r, thetas[:, :5], kernel_seed, n_latent_draws)
    logw = latent + log_p + jac - log_q
    return combine_importance_weights(logw)
