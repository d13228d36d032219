"""Posterior sampling front end for the five SV variants."""

from __future__ import annotations

import numpy as np

from ..errors import DegeneracyError, DomainError
from . import _kernels
from .model import PARAM_NAMES, PosteriorDraws, SvSpec

MIN_SAMPLE = 40

_DIAG_NAMES = ("h", "phi", "mu", "extra", "group")


def sample_posterior(
    spec: SvSpec,
    returns,
    init_params: np.ndarray | None = None,
    init_h: np.ndarray | None = None,
) -> PosteriorDraws:
    """Run the Gibbs sampler for the requested variant.

    Latent paths are drawn jointly through a Laplace proposal with an exact
    Metropolis-Hastings correction, so the chain targets the exact posterior;
    the acceptance rates in ``accept_rates`` are the knobs to watch.
    Optional ``init_params``/``init_h`` start the chain elsewhere (warm
    starts); they do not change its stationary distribution.
    """
    r = np.ascontiguousarray(returns, dtype=float)
    if r.size < MIN_SAMPLE:
        raise DomainError(f"need at least {MIN_SAMPLE} observations, got {r.size}")
    if np.all(r == r[0]):
        raise DegeneracyError("all returns identical; the likelihood is degenerate")
    prior_vec = spec.priors.as_vector()
    m = spec.mcmc
    ip = np.ascontiguousarray(init_params, dtype=float) if init_params is not None else np.empty(0)
    ih = np.ascontiguousarray(init_h, dtype=float) if init_h is not None else np.empty(0)
    jump_q = jump_k = None
    if spec.variant == "SV1":
        params, h, diag = _kernels.run_sv1(r, prior_vec, m.burn_in, m.retained, m.thin, m.seed, ip, ih)
    elif spec.variant == "SV2":
        params, h, diag = _kernels.run_sv2(r, prior_vec, m.burn_in, m.retained, m.thin, m.seed, ip, ih)
    elif spec.variant == "SV1_T":
        params, h, diag = _kernels.run_sv1t(r, prior_vec, m.burn_in, m.retained, m.thin, m.seed, ip, ih)
    elif spec.variant == "SV1_J":
        params, h, diag, jump_q, jump_k = _kernels.run_sv1j(
            r, prior_vec, m.burn_in, m.retained, m.thin, m.seed, ip, ih
        )
    else:
        params, h, diag = _kernels.run_sv1l(r, prior_vec, m.burn_in, m.retained, m.thin, m.seed, ip, ih)
    if not np.all(np.isfinite(params)) or not np.all(np.isfinite(h)):
        raise DegeneracyError(f"{spec.variant}: sampler produced non-finite draws")
    return PosteriorDraws(
        variant=spec.variant,
        param_names=PARAM_NAMES[spec.variant],
        params=params,
        h=h,
        returns=r,
        accept_rates={k: float(v) for k, v in zip(_DIAG_NAMES, diag)},
        seed=m.seed,
        prior=spec.priors,
        mcmc=m,
        jump_indicators=jump_q,
        jump_sizes=jump_k,
    )
