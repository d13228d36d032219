"""Command-line interface for the volatility laboratory.

The subcommands compose into the full experiment:

    etmvol synth -o run/data --seed 7
    etmvol ingest -d run/data -o run/ingest
    etmvol features -d run/data -o run/features
    etmvol instance-space -d run/data -o run/features
    etmvol fit -d run/data -o run/fits
    etmvol compare-ml -d run/data -o run/ml
    etmvol forecast -d run/data -o run/forecasts
    etmvol evaluate -d run/data -f run/forecasts/forecasts.json -o run/evaluation
    etmvol report -d run/data -r run -o run/report

Exit codes: 0 success, 2 configuration error, 3 data error, 4 estimation
failure rate above the configured threshold.
"""

from __future__ import annotations

import json
import os
import sys
import time
from dataclasses import replace

import click
import numpy as np

from ..errors import ConfigurationError, DataError, EtmvolError
from ..features import FeatureMatrix, compute_features, normalize_features, pca_instance_space
from ..garch import estimate_garch
from ..sv.model import SvSpec
from ..sv.sampler import sample_posterior
from . import report as rpt
from .config import ExperimentConfig, derive_seed, load_config
from .data import data_fingerprints, load_bundle, write_ingest_outputs
from .runner import (
    evaluate_forecasts,
    failure_rate,
    ml_table_with_bayes_factors,
    run_forecast_exercise,
    run_insample_comparison,
)
from .synth import generate_bundle

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_FAILURES = 4


def _bail(exc: Exception) -> int:
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return 1


def _config_from(ctx_params) -> ExperimentConfig:
    keys = (
        "window",
        "seed",
        "workers",
        "initial_window",
        "evaluation_months",
        "models",
        "burn_in",
        "retained",
        "warm_start",
    )
    overrides = {k: ctx_params.get(k) for k in keys if ctx_params.get(k) is not None}
    if "models" in overrides:
        overrides["models"] = tuple(overrides["models"].split(","))
    return load_config(ctx_params.get("config"), **overrides)


config_option = click.option("--config", type=click.Path(exists=True), default=None,
                             help="TOML config file; flags override its keys.")
seed_option = click.option("--seed", type=int, default=None, help="Master seed.")
workers_option = click.option("--workers", type=int, default=None, help="Parallel worker count.")
data_option = click.option("--data", "-d", "data_dir", required=True, type=click.Path(exists=True),
                           help="Directory with daily price CSVs and cpi.csv.")
out_option = click.option("--out", "-o", "out_dir", required=True, type=click.Path())


@click.group()
def main():
    """Volatility models, forecasts, and instance-space analysis for metal prices."""


@main.command()
@click.option("--out", "-o", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=20120701, show_default=True)
@click.option("--metals", type=int, default=6, show_default=True)
@click.option("--months", type=int, default=126, show_default=True)
def synth(out_dir, seed, metals, months):
    """Generate a synthetic daily-price bundle in the ingest CSV schemas."""
    try:
        manifest = generate_bundle(out_dir, seed=seed, n_metals=metals, months=months)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"wrote {manifest['n_metals']} metals x {manifest['months']} months to {out_dir}")


@main.command()
@data_option
@out_option
@config_option
def ingest(data_dir, out_dir, config):
    """Deflate, aggregate, and emit monthly series for every metal."""
    try:
        bundle = load_bundle(data_dir)
        write_ingest_outputs(bundle, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"ingested {len(bundle)} metals into {out_dir}")


def _feature_pipeline(bundle):
    metals = sorted(bundle)
    raw = np.array(
        [compute_features(bundle[m].rv, bundle[m].daily_returns).as_array() for m in metals]
    )
    features = normalize_features(FeatureMatrix(tuple(metals), raw))
    return features, pca_instance_space(features)


@main.command()
@data_option
@out_option
def features(data_dir, out_dir):
    """Compute the eight RV features (raw and normalized)."""
    try:
        bundle = load_bundle(data_dir)
        feats, space = _feature_pipeline(bundle)
        rpt.write_feature_outputs(feats, space, bundle, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"features for {len(feats.metal_ids)} metals written to {out_dir}")


@main.command("instance-space")
@data_option
@out_option
def instance_space(data_dir, out_dir):
    """Project metals into the two-dimensional PCA instance space."""
    try:
        bundle = load_bundle(data_dir)
        feats, space = _feature_pipeline(bundle)
        rpt.write_feature_outputs(feats, space, bundle, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(
        "variance explained: PC1 %.3f, PC2 %.3f"
        % (space.variance_explained[0], space.variance_explained[1])
    )


@main.command()
@data_option
@out_option
@config_option
@seed_option
@click.option("--models", type=str, default=None, help="Comma-separated model list.")
@click.option("--burn-in", "burn_in", type=int, default=None)
@click.option("--retained", type=int, default=None)
def fit(data_dir, out_dir, config, seed, models, burn_in, retained, **_):
    """Full-sample fits for every (metal, model); JSON summaries per pair."""
    try:
        cfg = _config_from(locals())
        bundle = load_bundle(data_dir)
        os.makedirs(out_dir, exist_ok=True)
        for mi, metal in enumerate(sorted(bundle)):
            returns = bundle[metal].monthly_return.values
            for ki, model in enumerate(cfg.models):
                task_seed = derive_seed(cfg.seed, 2000 + mi, ki)
                path = os.path.join(out_dir, f"{metal}_{model}.json")
                if model == "GARCH":
                    g = estimate_garch(returns)
                    with open(path, "w") as fh:
                        fh.write(g.to_json())
                else:
                    spec = SvSpec(model, priors=cfg.priors, mcmc=replace(cfg.mcmc, seed=task_seed))
                    post = sample_posterior(spec, returns)
                    with open(path, "w") as fh:
                        fh.write(post.summary_json())
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"fits written to {out_dir}")


@main.command("compare-ml")
@data_option
@out_option
@config_option
@seed_option
@click.option("--burn-in", "burn_in", type=int, default=None)
@click.option("--retained", type=int, default=None)
def compare_ml(data_dir, out_dir, config, seed, burn_in, retained):
    """Log marginal likelihoods with Bayes-factor columns against the benchmarks."""
    try:
        cfg = _config_from(locals())
        bundle = load_bundle(data_dir)
        rows = run_insample_comparison(cfg, bundle)
        table = ml_table_with_bayes_factors(rows)
        rpt.write_ml_table(rows, table, bundle, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"marginal-likelihood table written to {out_dir}")


@main.command()
@data_option
@out_option
@config_option
@seed_option
@workers_option
@click.option("--window", type=click.Choice(["expanding", "rolling"]), default=None)
@click.option("--models", type=str, default=None, help="Comma-separated model list.")
@click.option("--burn-in", "burn_in", type=int, default=None)
@click.option("--retained", type=int, default=None)
@click.option("--initial-window", "initial_window", type=int, default=None)
@click.option("--evaluation-months", "evaluation_months", type=int, default=None)
@click.option("--warm-start", "warm_start", is_flag=True, default=None)
def forecast(data_dir, out_dir, config, seed, workers, window, models, burn_in, retained,
             initial_window, evaluation_months, warm_start):
    """Run the expanding/rolling one-step forecast exercise."""
    try:
        cfg = _config_from(locals())
        bundle = load_bundle(data_dir)
        t0 = time.time()
        records = run_forecast_exercise(cfg, bundle)
        rate = failure_rate(records)
        rpt.write_forecasts(records, out_dir)
        rpt.write_manifest(cfg.to_dict(), data_fingerprints(data_dir), out_dir,
                           extra={"n_records": len(records), "failure_rate": rate})
        rpt.write_timing({"forecast_seconds": time.time() - t0}, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"{len(records)} forecast records written to {out_dir} (failure rate {rate:.3f})")
    if rate > cfg.failure_threshold:
        click.echo(f"estimation failure rate {rate:.3f} exceeds threshold "
                   f"{cfg.failure_threshold:.3f}", err=True)
        sys.exit(EXIT_FAILURES)


@main.command()
@data_option
@out_option
@config_option
@click.option("--forecasts", "-f", "forecasts_path", required=True, type=click.Path(exists=True))
def evaluate(data_dir, out_dir, config, forecasts_path):
    """Score forecasts against the volatility proxies and emit loss tables."""
    try:
        cfg = _config_from(locals())
        bundle = load_bundle(data_dir)
        records = rpt.read_forecasts(forecasts_path)
        evaluation = evaluate_forecasts(records, bundle, cfg)
        rpt.write_loss_tables(evaluation, bundle, out_dir)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"loss tables written to {out_dir}")


@main.command()
@data_option
@click.option("--run", "-r", "run_dir", required=True, type=click.Path(exists=True),
              help="Run directory holding earlier stage outputs.")
@out_option
def report(data_dir, run_dir, out_dir):
    """Render SVG figures and summary tables from earlier stage outputs."""
    try:
        bundle = load_bundle(data_dir)
        feats, space = _feature_pipeline(bundle)
        rpt.write_feature_outputs(feats, space, bundle, out_dir)
        evaluation = None
        ml_table = None
        loss_path = os.path.join(run_dir, "evaluation", "loss_tables.json")
        if os.path.exists(loss_path):
            with open(loss_path) as fh:
                evaluation = json.load(fh)
        ml_path = os.path.join(run_dir, "ml", "ml_table.json")
        if os.path.exists(ml_path):
            with open(ml_path) as fh:
                ml_table = json.load(fh)
        rpt.write_report_figures(feats, space, bundle, out_dir,
                                 evaluation=evaluation, ml_table=ml_table)
    except EtmvolError as exc:
        sys.exit(_bail(exc))
    click.echo(f"report written to {out_dir}")


if __name__ == "__main__":
    main()
