"""Experiment configuration: TOML file plus CLI overrides."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError
from ..sv.model import McmcSettings, PriorSet

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ALL_MODELS = ("GARCH", "SV1", "SV2", "SV1_J", "SV1_T", "SV1_L")
PROXIES = ("rv", "rg2star")
WINDOW_KINDS = ("expanding", "rolling")


@dataclass(frozen=True)
class ExperimentConfig:
    window: str = "expanding"
    initial_window: int = 66          # months in the first estimation window
    evaluation_months: int = 60       # one-step forecasts to produce
    models: tuple[str, ...] = ALL_MODELS
    proxies: tuple[str, ...] = PROXIES
    seed: int = 20120701
    workers: int = 1
    density_draws: int = 20000
    quantile_levels: int = 20
    mcmc: McmcSettings = field(default_factory=McmcSettings)
    priors: PriorSet = field(default_factory=PriorSet)
    warm_start: bool = False
    annualization_factor: float = 12.0  # monthly variance -> annualized proxy scale
    failure_threshold: float = 0.10
    ml_importance_draws: int = 20000
    ml_latent_draws: int = 16

    def __post_init__(self):
        if self.window not in WINDOW_KINDS:
            raise ConfigurationError(f"window must be one of {WINDOW_KINDS}")
        unknown = set(self.models) - set(ALL_MODELS)
        if unknown:
            raise ConfigurationError(f"unknown models: {sorted(unknown)}")
        unknown = set(self.proxies) - set(PROXIES)
        if unknown:
            raise ConfigurationError(f"unknown proxies: {sorted(unknown)}")
        if self.initial_window < 12:
            raise ConfigurationError("initial window must cover at least 12 months")
        if self.evaluation_months < 1:
            raise ConfigurationError("need at least one evaluation month")
        if not 0 <= self.failure_threshold <= 1:
            raise ConfigurationError("failure threshold must be a fraction")
        if self.density_draws < 1000:
            raise ConfigurationError("density draws floor is 1000")

    def smoke(self) -> "ExperimentConfig":
        return replace(self, mcmc=self.mcmc.smoke())

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Build a config from an optional TOML file and keyword overrides.

    TOML sections [data], [models], [mcmc], [experiment], [output] map onto
    the flat config; any CLI flag passed as an override wins.
    """
    values: dict = {}
    mcmc_values: dict = {}
    prior_values: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigurationError(f"invalid TOML in {path}: {exc}") from exc
        section_keys = {
            "experiment": (
                "window",
                "initial_window",
                "evaluation_months",
                "seed",
                "workers",
                "warm_start",
                "annualization_factor",
                "failure_threshold",
            ),
            "models": ("models", "proxies", "density_draws", "quantile_levels",
                       "ml_importance_draws", "ml_latent_draws"),
        }
        for section, keys in section_keys.items():
            for key, value in raw.get(section, {}).items():
                if key not in keys:
                    raise ConfigurationError(f"unknown key {key!r} in [{section}]")
                values[key] = tuple(value) if isinstance(value, list) else value
        for key, value in raw.get("mcmc", {}).items():
            if key not in ("burn_in", "retained", "thin", "seed"):
                raise ConfigurationError(f"unknown key {key!r} in [mcmc]")
            mcmc_values[key] = value
        for key, value in raw.get("priors", {}).items():
            prior_values[key] = value
        # [data] and [output] carry paths handled by the CLI; accept and ignore
        for section in ("data", "output"):
            raw.get(section, {})
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("burn_in", "retained", "thin"):
            mcmc_values[key] = value
        else:
            values[key] = tuple(value) if isinstance(value, list) else value
    if mcmc_values:
        base = McmcSettings(**{**{"burn_in": 5000, "retained": 20000, "thin": 1, "seed": 0}, **mcmc_values})
        values["mcmc"] = base
    if prior_values:
        values["priors"] = PriorSet(**prior_values)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc


def derive_seed(master: int, *path: int) -> int:
    """Deterministic per-task seed: master plus a task coordinate path."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1)[0])
