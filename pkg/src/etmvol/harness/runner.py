"""Experiment orchestration: window loops, model fits, forecasts, evaluation.

Every (metal, model, origin) task gets its own derived seed, runs
independently (optionally in a process pool), and is merged in deterministic
order, so results are identical for any worker count.  Estimation failures
are flagged and skipped, never silently dropped.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from ..errors import AlignmentError, ConfigurationError, DataError
from ..garch import estimate_garch, garch_density_forecast, garch_forecast_variance
from ..ingest import MetalData
from ..score import (
    default_alpha_grid,
    dm_test,
    qcrps_terms,
    qcrps_weights,
    qlike_terms,
    relative_loss,
    squared_errors,
)
from ..sv.forecast import sv_forecast_variance, sv_predictive_quantiles
from ..sv.marglik import bayes_factor, estimate_log_ml
from ..sv.model import SvSpec
from ..sv.sampler import sample_posterior
from .config import ExperimentConfig, derive_seed
from .garch_ml import garch_log_ml

MODEL_LABELS = {
    "GARCH": "GARCH(1,1)",
    "SV1": "SV(1)",
    "SV2": "SV(2)",
    "SV1_J": "SV(1)-J",
    "SV1_T": "SV(1)-t",
    "SV1_L": "SV(1)-L",
}


@dataclass(frozen=True)
class ForecastRecord:
    metal: str
    model: str
    origin_month: str
    target_month: str
    variance_forecast: float
    quantiles: tuple
    seed: int
    ok: bool = True
    error: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MlRow:
    metal: str
    model: str
    log_ml: float
    nse: float
    ess: float
    low_ess: bool
    note: str = ""


def window_slice(n_months: int, initial_window: int, origin_index: int, kind: str) -> slice:
    """Return-index slice for the estimation window ending at a month index.

    Month j carries return index j-1; the window's returns are those dated
    inside it.  Expanding windows start at the sample start; rolling windows
    keep ``initial_window`` months.
    """
    if origin_index >= n_months:
        raise ConfigurationError("origin beyond the data span")
    if kind == "expanding":
        return slice(0, origin_index)
    start = max(origin_index - initial_window, 0)
    return slice(start, origin_index)


def forecast_task(
    metal: str,
    model: str,
    returns: np.ndarray,
    origin_month: str,
    target_month: str,
    config: ExperimentConfig,
    seed: int,
    init_params: np.ndarray | None = None,
    init_h: np.ndarray | None = None,
):
    """Fit one model on one window; returns (record, posterior or None)."""
    alphas = default_alpha_grid(config.quantile_levels)
    post = None
    try:
        if model == "GARCH":
            fit = estimate_garch(returns)
            eps_last = returns[-1] - fit.params.mu
            sig2_next = garch_forecast_variance(fit.params, eps_last, fit.variance_path[-1])
            draws = garch_density_forecast(fit.params, sig2_next, config.density_draws, seed)
            quantiles = np.quantile(draws, alphas)
        else:
            spec = SvSpec(model, priors=config.priors, mcmc=replace(config.mcmc, seed=seed))
            post = sample_posterior(spec, returns, init_params=init_params, init_h=init_h)
            sig2_next = sv_forecast_variance(post, seed=seed + 1)
            quantiles = sv_predictive_quantiles(post, alphas, seed=seed + 2)
        record = ForecastRecord(
            metal=metal,
            model=model,
            origin_month=origin_month,
            target_month=target_month,
            variance_forecast=float(sig2_next),
            quantiles=tuple(float(q) for q in quantiles),
            seed=seed,
        )
        return record, post
    except Exception as exc:  # flag-and-continue failure policy
        record = ForecastRecord(
            metal=metal,
            model=model,
            origin_month=origin_month,
            target_month=target_month,
            variance_forecast=float("nan"),
            quantiles=(),
            seed=seed,
            ok=False,
            error=f"{type(exc).__name__}: {exc}",
        )
        return record, None


def _run_task(args):
    record, _ = forecast_task(*args)
    return record


def _run_pair_task(args):
    """All origins for one (metal, model), sequentially, with warm starts."""
    metal, model, returns, months, config, seeds = args
    n_months = len(months)
    records = []
    prev_post = None
    prev_slice = None
    for oi, seed in enumerate(seeds):
        origin_index = config.initial_window - 1 + oi
        sl = window_slice(n_months, config.initial_window, origin_index, config.window)
        init_params = init_h = None
        if config.warm_start and prev_post is not None:
            init_params = prev_post.params.mean(axis=0)
            mean_h = prev_post.h.mean(axis=0)
            grown = mean_h if sl.start == prev_slice.start else mean_h[1:]
            init_h = np.concatenate([grown, [mean_h[-1]]])
        record, post = forecast_task(
            metal,
            model,
            returns[sl],
            str(months[origin_index]),
            str(months[origin_index + 1]),
            config,
            seed,
            init_params=init_params,
            init_h=init_h,
        )
        records.append(record)
        prev_post, prev_slice = post, sl
    return records


def run_forecast_exercise(config: ExperimentConfig, bundle: dict[str, MetalData]) -> list[ForecastRecord]:
    """The expanding/rolling one-step forecast exercise over all metals and models.

    Cold starts give an embarrassingly parallel pool over (metal, model,
    origin); warm starts chain the origins of each (metal, model) pair, so
    the pool is over pairs instead.
    """
    metal_ids = sorted(bundle)
    for metal in metal_ids:
        n_months = len(bundle[metal].monthly_price.months)
        if config.initial_window + config.evaluation_months > n_months:
            raise ConfigurationError(
                f"{metal}: window {config.initial_window} + evaluation "
                f"{config.evaluation_months} exceeds {n_months} months"
            )
    if config.warm_start:
        pair_tasks = []
        for mi, metal in enumerate(metal_ids):
            data = bundle[metal]
            for ki, model in enumerate(config.models):
                seeds = [derive_seed(config.seed, mi, ki, oi) for oi in range(config.evaluation_months)]
                pair_tasks.append(
                    (metal, model, data.monthly_return.values, data.monthly_price.months, config, seeds)
                )
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                chunks = list(pool.map(_run_pair_task, pair_tasks))
        else:
            chunks = [_run_pair_task(t) for t in pair_tasks]
        records = [r for chunk in chunks for r in chunk]
    else:
        tasks = []
        for mi, metal in enumerate(metal_ids):
            data = bundle[metal]
            months = data.monthly_price.months
            returns = data.monthly_return.values
            for ki, model in enumerate(config.models):
                for oi in range(config.evaluation_months):
                    origin_index = config.initial_window - 1 + oi
                    sl = window_slice(len(months), config.initial_window, origin_index, config.window)
                    tasks.append(
                        (
                            metal,
                            model,
                            returns[sl],
                            str(months[origin_index]),
                            str(months[origin_index + 1]),
                            config,
                            derive_seed(config.seed, mi, ki, oi),
                        )
                    )
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                records = list(pool.map(_run_task, tasks, chunksize=8))
        else:
            records = [_run_task(t) for t in tasks]
    # deterministic order regardless of scheduling
    records.sort(key=lambda r: (r.metal, r.model, r.origin_month))
    return records


def failure_rate(records: list[ForecastRecord]) -> float:
    if not records:
        return 0.0
    return sum(not r.ok for r in records) / len(records)


def run_insample_comparison(config: ExperimentConfig, bundle: dict[str, MetalData]) -> list[MlRow]:
    """Full-sample log marginal likelihoods for every (metal, model) pair."""
    rows = []
    metal_ids = sorted(bundle)
    for mi, metal in enumerate(metal_ids):
        returns = bundle[metal].monthly_return.values
        for ki, model in enumerate(config.models):
            seed = derive_seed(config.seed, 1000 + mi, ki)
            if model == "GARCH":
                est = garch_log_ml(returns, n_importance_draws=config.ml_importance_draws, seed=seed)
                note = "Bayesian bridge over the benchmark's documented prior"
            else:
                spec = SvSpec(model, priors=config.priors, mcmc=replace(config.mcmc, seed=seed))
                post = sample_posterior(spec, returns)
                est = estimate_log_ml(
                    spec,
                    returns,
                    post,
                    n_importance_draws=config.ml_importance_draws,
                    n_latent_draws=config.ml_latent_draws,
                    seed=seed + 1,
                )
                note = ""
            rows.append(
                MlRow(
                    metal=metal,
                    model=model,
                    log_ml=est.log_ml,
                    nse=est.nse,
                    ess=est.ess,
                    low_ess=est.low_ess,
                    note=note,
                )
            )
    return rows


def ml_table_with_bayes_factors(rows: list[MlRow]) -> dict:
    """Per-metal table with 2 log BF columns against the two benchmarks."""
    by_metal: dict[str, dict[str, MlRow]] = {}
    for row in rows:
        by_metal.setdefault(row.metal, {})[row.model] = row
    table = {}
    for metal, models in sorted(by_metal.items()):
        entry = {
            m: {"log_ml": r.log_ml, "nse": r.nse, "low_ess": r.low_ess} for m, r in models.items()
        }
        best = max(models.values(), key=lambda r: r.log_ml)
        entry["best_model"] = best.model
        for bench in ("GARCH", "SV2"):
            if bench not in models:
                continue
            # best non-benchmark model against the benchmark
            rivals = [r for m, r in models.items() if m != bench]
            if not rivals:
                continue
            top = max(rivals, key=lambda r: r.log_ml)
            two_log_bf, category = bayes_factor(top.log_ml, models[bench].log_ml)
            entry[f"bf_vs_{bench}"] = {
                "best_model": top.model,
                "two_log_bf": two_log_bf,
                "category": category,
            }
        table[metal] = entry
    return table


# ---------------------------------------------------------------------------
# Forecast evaluation
# ---------------------------------------------------------------------------

POINT_LOSSES = ("rmsfe", "qlike")
DENSITY_WEIGHTS = ("center", "tails")


@dataclass(frozen=True)
class LossCell:
    relative: float
    stars: str
    dm_statistic: float
    dm_pvalue: float
    raw_loss: float
    benchmark_loss: float


def _records_by(records: list[ForecastRecord]):
    out: dict[str, dict[str, list[ForecastRecord]]] = {}
    for r in records:
        out.setdefault(r.metal, {}).setdefault(r.model, []).append(r)
    for metal in out:
        for model in out[metal]:
            out[metal][model].sort(key=lambda r: r.target_month)
    return out


def _aligned_records(recs: list[ForecastRecord], benchmark: list[ForecastRecord]):
    ok_targets = {r.target_month for r in recs if r.ok} & {
        r.target_month for r in benchmark if r.ok
    }
    a = [r for r in recs if r.target_month in ok_targets]
    b = [r for r in benchmark if r.target_month in ok_targets]
    return a, b


def evaluate_forecasts(
    records: list[ForecastRecord],
    bundle: dict[str, MetalData],
    config: ExperimentConfig,
    benchmark: str = "GARCH",
) -> dict:
    """Relative-loss tables with equal-predictive-ability stars.

    Produces four point-forecast tables (two losses by two proxies) and two
    density tables (center- and tail-weighted qCRPS), all relative to the
    benchmark, plus per-metal best-model tallies for the instance-space
    overlays.
    """
    alphas = default_alpha_grid(config.quantile_levels)
    by = _records_by(records)
    tables: dict[str, dict] = {}
    point_wins: dict[str, dict[str, int]] = {}
    density_wins: dict[str, dict[str, int]] = {}

    for proxy_name in config.proxies:
        for loss_name in POINT_LOSSES:
            table: dict[str, dict[str, LossCell]] = {}
            for metal, models in sorted(by.items()):
                if benchmark not in models:
                    raise ConfigurationError(f"benchmark {benchmark} missing for {metal}")
                proxy_series = getattr(bundle[metal], "rv" if proxy_name == "rv" else "rg2star")
                losses: dict[str, np.ndarray] = {}
                for model, recs in models.items():
                    a, b = _aligned_records(recs, models[benchmark])
                    if not a:
                        continue
                    proxy = _proxy_at(proxy_series, [r.target_month for r in a], metal)
                    fc = np.array([r.variance_forecast for r in a]) * config.annualization_factor
                    losses[model] = (
                        squared_errors(proxy, fc)
                        if loss_name == "rmsfe"
                        else qlike_terms(proxy, fc)
                    )
                bench_losses = losses.get(benchmark)
                if bench_losses is None:
                    continue
                row: dict[str, LossCell] = {}
                agg = {
                    m: float(np.sqrt(v.mean())) if loss_name == "rmsfe" else float(v.mean())
                    for m, v in losses.items()
                }
                for model, per_period in losses.items():
                    if model == benchmark:
                        continue
                    dm = dm_test(per_period - bench_losses)
                    row[model] = LossCell(
                        relative=relative_loss(agg[model], agg[benchmark]),
                        stars=dm.stars(),
                        dm_statistic=dm.statistic,
                        dm_pvalue=dm.p_value,
                        raw_loss=agg[model],
                        benchmark_loss=agg[benchmark],
                    )
                table[metal] = row
                winner = min(agg, key=lambda m: agg[m])
                point_wins.setdefault(metal, {}).setdefault(winner, 0)
                point_wins[metal][winner] += 1
            tables[f"point_{loss_name}_{proxy_name}"] = table

    for weight_kind in DENSITY_WEIGHTS:
        table = {}
        for metal, models in sorted(by.items()):
            realized = _realized_returns(bundle[metal])
            losses = {}
            for model, recs in models.items():
                a, _ = _aligned_records(recs, models[benchmark])
                if not a:
                    continue
                w = qcrps_weights(alphas, weight_kind)
                vals = []
                for rec in a:
                    r_next = realized[rec.target_month]
                    terms = qcrps_terms(alphas, np.asarray(rec.quantiles), r_next)
                    vals.append(float((w * terms).mean()))
                losses[model] = np.array(vals)
            bench_losses = losses.get(benchmark)
            if bench_losses is None:
                continue
            row = {}
            agg = {m: float(v.mean()) for m, v in losses.items()}
            for model, per_period in losses.items():
                if model == benchmark:
                    continue
                dm = dm_test(per_period - bench_losses)
                row[model] = LossCell(
                    relative=relative_loss(agg[model], agg[benchmark]),
                    stars=dm.stars(),
                    dm_statistic=dm.statistic,
                    dm_pvalue=dm.p_value,
                    raw_loss=agg[model],
                    benchmark_loss=agg[benchmark],
                )
            table[metal] = row
            winner = min(agg, key=lambda m: agg[m])
            density_wins.setdefault(metal, {}).setdefault(winner, 0)
            density_wins[metal][winner] += 1
        tables[f"density_{weight_kind}"] = table

    return {
        "tables": tables,
        "point_wins": point_wins,
        "density_wins": density_wins,
        "benchmark": benchmark,
    }


def _proxy_at(series, target_months: list[str], metal: str) -> np.ndarray:
    lookup = {str(m): v for m, v in zip(series.months, series.values)}
    missing = [m for m in target_months if m not in lookup]
    if missing:
        raise AlignmentError(f"{metal}: proxy missing for months {missing}")
    return np.array([lookup[m] for m in target_months])


def _realized_returns(data: MetalData) -> dict[str, float]:
    return {str(m): float(v) for m, v in zip(data.monthly_return.months, data.monthly_return.values)}
