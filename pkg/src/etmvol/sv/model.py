"""Model specifications, priors, and posterior containers for the SV family."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError
from . import _kernels

VARIANTS = ("SV1", "SV2", "SV1_T", "SV1_J", "SV1_L")

PARAM_NAMES = {
    "SV1": ("mu", "phi0", "phi1", "omega2"),
    "SV2": ("mu", "phi0", "phi1", "phi2", "omega2"),
    "SV1_T": ("mu", "phi0", "phi1", "omega2", "nu"),
    "SV1_J": ("mu", "phi0", "phi1", "omega2", "kappa", "mu_k", "sigma_k2"),
    "SV1_L": ("mu", "phi0", "phi1", "omega2", "rho"),
}


@dataclass(frozen=True)
class PriorSet:
    """Weakly informative default priors; every hyperparameter is configurable.

    The persistence prior puts (phi1+1)/2 ~ Beta(a, b) on the stationary
    interval; SV(2) replaces it by a uniform prior over the stationary
    triangle of (phi1, phi2).
    """

    mu_mean: float = 0.0
    mu_var: float = 100.0
    phi0_mean: float = 0.0
    phi0_var: float = 100.0
    phi1_beta_a: float = 20.0
    phi1_beta_b: float = 1.5
    omega2_shape: float = 2.5
    omega2_scale: float = 0.025
    nu_lo: float = 2.0
    nu_hi: float = 50.0
    kappa_a: float = 2.0
    kappa_b: float = 100.0
    mu_k_mean: float = 0.0
    mu_k_var: float = 1.0
    sigma_k2_shape: float = 2.5
    sigma_k2_scale: float = 0.1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise ConfigurationError(f"prior hyperparameter {name} must be finite")
        if self.nu_lo < 2.0 or self.nu_hi <= self.nu_lo:
            raise ConfigurationError("nu prior requires 2 <= nu_lo < nu_hi")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.mu_mean,
                self.mu_var,
                self.phi0_mean,
                self.phi0_var,
                self.phi1_beta_a,
                self.phi1_beta_b,
                self.omega2_shape,
                self.omega2_scale,
                self.nu_lo,
                self.nu_hi,
                self.kappa_a,
                self.kappa_b,
                self.mu_k_mean,
                self.mu_k_var,
                self.sigma_k2_shape,
                self.sigma_k2_scale,
            ]
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class McmcSettings:
    burn_in: int = 5000
    retained: int = 20000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.burn_in < 1 or self.retained < 1 or self.thin < 1:
            raise ConfigurationError("MCMC settings must be positive")

    def smoke(self) -> "McmcSettings":
        return replace(self, burn_in=2000, retained=5000)


@dataclass(frozen=True)
class SvSpec:
    variant: str
    priors: PriorSet = field(default_factory=PriorSet)
    mcmc: McmcSettings = field(default_factory=McmcSettings)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown SV variant {self.variant!r}; choose from {VARIANTS}")

    @property
    def param_names(self) -> tuple[str, ...]:
        return PARAM_NAMES[self.variant]

    def with_seed(self, seed: int) -> "SvSpec":
        return replace(self, mcmc=replace(self.mcmc, seed=seed))


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained MCMC output for one (variant, data) fit."""

    variant: str
    param_names: tuple[str, ...]
    params: np.ndarray          # keep x n_params
    h: np.ndarray               # keep x T latent log-variance paths
    returns: np.ndarray
    accept_rates: dict
    seed: int
    prior: PriorSet
    mcmc: McmcSettings
    jump_indicators: np.ndarray | None = None
    jump_sizes: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.params.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.params[:, self.param_names.index(name)]

    def posterior_mean(self) -> dict:
        return {n: float(self.column(n).mean()) for n in self.param_names}

    def posterior_sd(self) -> dict:
        return {n: float(self.column(n).std(ddof=1)) for n in self.param_names}

    def effective_sample_sizes(self) -> dict:
        return {n: effective_sample_size(self.column(n)) for n in self.param_names}

    def summary_json(self) -> str:
        qs = (0.05, 0.25, 0.5, 0.75, 0.95)
        summary = {
            name: {
                "mean": float(self.column(name).mean()),
                "sd": float(self.column(name).std(ddof=1)),
                "quantiles": {str(q): float(np.quantile(self.column(name), q)) for q in qs},
                "ess": effective_sample_size(self.column(name)),
            }
            for name in self.param_names
        }
        payload = {
            "model": self.variant,
            "n_draws": self.n_draws,
            "seed": self.seed,
            "mcmc": asdict(self.mcmc),
            "prior": self.prior.to_dict(),
            "accept_rates": self.accept_rates,
            "parameters": summary,
        }
        return json.dumps(payload, sort_keys=True)

    def dump_params_binary(self, path) -> None:
        """Raw draw dump: little-endian float64, row-major draws x params.

        A JSON sidecar records the layout so the dump can be audited.
        """
        arr = np.ascontiguousarray(self.params, dtype="<f8")
        arr.tofile(path)
        meta = {
            "dtype": "<f8",
            "order": "row-major",
            "shape": list(arr.shape),
            "columns": list(self.param_names),
        }
        with open(str(path) + ".meta.json", "w") as fh:
            json.dump(meta, fh, sort_keys=True)


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from paired autocorrelation sums, truncated at the first negative pair."""
    x = np.asarray(x, dtype=float)
    n = x.size
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        return float(n)

    def rho(k: int) -> float:
        return float(xc[k:] @ xc[:-k]) / denom

    acc = 0.0
    k = 1
    while k + 1 < n // 2:
        pair = rho(k) + rho(k + 1)
        if pair < 0.0:
            break
        acc += pair
        k += 2
    ess = n / (1.0 + 2.0 * acc)
    return float(min(max(ess, 1.0), n))


_KERNELS = {
    "SV1": _kernels.run_sv1,
    "SV2": _kernels.run_sv2,
    "SV1_T": _kernels.run_sv1t,
    "SV1_J": _kernels.run_sv1j,
    "SV1_L": _kernels.run_sv1l,
}
