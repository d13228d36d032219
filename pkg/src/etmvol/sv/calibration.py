"""Simulation-based calibration of the SV samplers.

For each replication, parameters are drawn from the prior, data simulated
from them, and the posterior sampled; the rank of each true parameter among
thinned posterior draws must be uniform if the sampler targets the exact
posterior.  Uniformity is screened with a chi-square goodness-of-fit test on
binned ranks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import ConfigurationError
from .model import PriorSet, SvSpec, McmcSettings
from .sampler import sample_posterior
from .simulate import draw_from_prior, simulate_sv

# Number of (near-independent) posterior draws used per rank; ranks then take
# L+1 = 40 values, which bins evenly.
SBC_DRAWS = 39


@dataclass(frozen=True)
class SbcResult:
    variant: str
    n_replications: int
    ranks: dict  # param name -> int array of ranks in 0..SBC_DRAWS
    failures: int

    def chi2_pvalues(self, n_bins: int = 8) -> dict:
        return {name: rank_uniformity_pvalue(r, SBC_DRAWS, n_bins) for name, r in self.ranks.items()}


def rank_uniformity_pvalue(ranks: np.ndarray, n_draws: int = SBC_DRAWS, n_bins: int = 8) -> float:
    """Chi-square goodness-of-fit p-value for rank uniformity."""
    n_values = n_draws + 1
    if n_values % n_bins != 0:
        raise ConfigurationError(f"{n_bins} bins do not evenly divide {n_values} rank values")
    width = n_values // n_bins
    counts = np.bincount(np.asarray(ranks) // width, minlength=n_bins)
    expected = len(ranks) / n_bins
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    return float(stats.chi2.sf(chi2, df=n_bins - 1))


def run_sbc(
    variant: str,
    n_replications: int,
    T: int,
    seed: int,
    priors: PriorSet | None = None,
    burn_in: int = 500,
    sweeps: int = 2340,
) -> SbcResult:
    """Run the calibration experiment for one variant.

    ``sweeps`` post-burn-in draws are thinned down to SBC_DRAWS per rank, so
    the default keeps a thinning factor of 60.
    """
    priors = priors or PriorSet()
    thin = max(sweeps // SBC_DRAWS, 1)
    retained = SBC_DRAWS
    rng = np.random.default_rng(seed)
    ranks: dict[str, list[int]] = {}
    failures = 0
    for rep in range(n_replications):
        rep_seed = int(rng.integers(0, 2**31 - 1))
        truth = draw_from_prior(variant, priors, rng)
        r, _ = simulate_sv(variant, truth, T, seed=rep_seed)
        spec = SvSpec(
            variant,
            priors=priors,
            mcmc=McmcSettings(burn_in=burn_in, retained=retained, thin=thin, seed=rep_seed + 1),
        )
        try:
            draws = sample_posterior(spec, r)
        except Exception:
            failures += 1
            continue
        for name in draws.param_names:
            if name not in truth:
                continue
            rank = int(np.sum(draws.column(name) < truth[name]))
            ranks.setdefault(name, []).append(rank)
    return SbcResult(
        variant=variant,
        n_replications=n_replications,
        ranks={k: np.asarray(v) for k, v in ranks.items()},
        failures=failures,
    )
