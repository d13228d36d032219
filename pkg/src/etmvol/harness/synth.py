"""Synthetic data bundles in the exact CSV schemas the ingest step reads.

Each synthetic metal gets daily prices simulated from a stochastic-volatility
or GARCH daily-return process, with per-metal zero-return contamination (to
populate the illiquidity feature) and optional jump days, plus a smooth CPI
series.  Everything is deterministic given the master seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..errors import ConfigurationError
from .config import derive_seed

CATEGORY_CYCLE = ("base", "precious", "other")


@dataclass(frozen=True)
class SyntheticMetalConfig:
    name: str
    category: str
    process: str           # "sv" | "garch"
    zero_rate: float       # probability a day repeats the previous price
    jump_prob: float
    phi1: float
    omega2: float
    base_vol: float        # average daily percent-return scale


def default_metal_configs(n_metals: int) -> list[SyntheticMetalConfig]:
    """A spread of parameterizations covering quiet, noisy, and illiquid regimes."""
    configs = []
    zero_rates = (0.0, 0.02, 0.05, 0.15, 0.3, 0.45)
    phi1s = (0.98, 0.9, 0.8, 0.95, 0.7, 0.85)
    om2s = (0.02, 0.05, 0.1, 0.03, 0.2, 0.08)
    vols = (1.0, 1.5, 2.5, 0.8, 3.0, 1.2)
    jumps = (0.0, 0.0, 0.01, 0.0, 0.03, 0.005)
    for i in range(n_metals):
        j = i % 6
        configs.append(
            SyntheticMetalConfig(
                name=f"metal{i:02d}",
                category=CATEGORY_CYCLE[i % 3],
                process="garch" if i % 5 == 4 else "sv",
                zero_rate=zero_rates[j],
                jump_prob=jumps[j],
                phi1=phi1s[j],
                omega2=om2s[j],
                base_vol=vols[j],
            )
        )
    return configs


def business_days(start_month: np.datetime64, months: int) -> np.ndarray:
    start = start_month.astype("datetime64[D]")
    end = (start_month + months).astype("datetime64[D]")
    days = np.arange(start, end)
    weekday = (days.astype("int64") + 4) % 7  # 1970-01-01 was a Thursday
    return days[weekday < 5]


def simulate_daily_prices(cfg: SyntheticMetalConfig, n_days: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    phi0 = 2.0 * np.log(cfg.base_vol)
    if cfg.process == "sv":
        om = np.sqrt(cfg.omega2)
        h = phi0 + om / np.sqrt(1 - cfg.phi1**2) * rng.standard_normal()
        returns = np.empty(n_days)
        for t in range(n_days):
            returns[t] = np.exp(h / 2.0) * rng.standard_normal()
            h = phi0 + cfg.phi1 * (h - phi0) + om * rng.standard_normal()
    else:
        a1 = 0.08
        b1 = cfg.phi1 - a1
        a0 = cfg.base_vol**2 * (1.0 - a1 - b1)
        sig2 = cfg.base_vol**2
        eps2 = sig2
        returns = np.empty(n_days)
        for t in range(n_days):
            sig2 = a0 + a1 * eps2 + b1 * sig2
            eps = np.sqrt(sig2) * rng.standard_normal()
            returns[t] = eps
            eps2 = eps * eps
    if cfg.jump_prob > 0:
        jumps = rng.random(n_days) < cfg.jump_prob
        returns = returns + jumps * rng.normal(0.0, 8.0 * cfg.base_vol, n_days)
    if cfg.zero_rate > 0:
        frozen = rng.random(n_days) < cfg.zero_rate
        returns = np.where(frozen, 0.0, returns)
    prices = 100.0 * np.exp(np.cumsum(returns) / 100.0)
    return prices


def generate_bundle(
    out_dir,
    seed: int,
    n_metals: int = 6,
    months: int = 126,
    start_month: str = "2012-07",
    cpi_monthly_growth: float = 0.002,
) -> dict:
    """Write price CSVs plus cpi.csv and a bundle manifest; returns the manifest."""
    if months < 80:
        raise ConfigurationError("need at least 80 months for a usable bundle")
    os.makedirs(out_dir, exist_ok=True)
    start = np.datetime64(start_month, "M")
    days = business_days(start, months)
    configs = default_metal_configs(n_metals)
    metals = []
    for i, cfg in enumerate(configs):
        prices = simulate_daily_prices(cfg, len(days), seed=derive_seed(seed, 0, i))
        df = pd.DataFrame({"date": days.astype(str), "price": prices})
        path = os.path.join(out_dir, f"{cfg.name}.csv")
        df.to_csv(path, index=False, float_format="%.10f")
        metals.append({"name": cfg.name, "category": cfg.category, "file": f"{cfg.name}.csv"})
    cpi_months = np.arange(start, start + months)
    rng = np.random.default_rng(derive_seed(seed, 1, 0))
    growth = cpi_monthly_growth + 0.0005 * rng.standard_normal(months)
    cpi = 100.0 * np.exp(np.cumsum(np.concatenate([[0.0], growth[1:]])))
    pd.DataFrame({"month": cpi_months.astype(str), "index": cpi}).to_csv(
        os.path.join(out_dir, "cpi.csv"), index=False, float_format="%.8f"
    )
    manifest = {
        "seed": seed,
        "n_metals": n_metals,
        "months": months,
        "start_month": str(start),
        "metals": metals,
        "cpi_file": "cpi.csv",
    }
    with open(os.path.join(out_dir, "bundle.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
    return manifest
