"""Report emission: CSV tables, JSON twins, and SVG figures.

All CSV/JSON outputs are byte-reproducible for a fixed configuration and
inputs: floats use one fixed format, JSON keys are sorted, and matplotlib's
SVG hash salt and date metadata are pinned.  Wall-clock timings go to a
separate ``timing.json`` so the deterministic manifest stays deterministic.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "etmvol"
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .. import __version__
from ..features import FEATURE_NAMES, FeatureMatrix, InstanceSpace
from ..ingest import MetalData
from .runner import MODEL_LABELS, ForecastRecord, MlRow

FLOAT_FMT = "%.10g"

CATEGORY_ORDER = {"base": 0, "precious": 1, "other": 2}


def _savefig(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _json_dump(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=_coerce)
        fh.write("\n")


def _coerce(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def metal_sort_key(bundle: dict[str, MetalData]):
    def key(metal: str):
        return (CATEGORY_ORDER.get(bundle[metal].category, 3), metal)

    return key


# ---------------------------------------------------------------------------
# Forecast records
# ---------------------------------------------------------------------------

def write_forecasts(records: list[ForecastRecord], out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _json_dump([r.to_dict() for r in records], os.path.join(out_dir, "forecasts.json"))
    rows = [
        {
            "metal": r.metal,
            "model": r.model,
            "origin_month": r.origin_month,
            "target_month": r.target_month,
            "variance_forecast": r.variance_forecast,
            "ok": r.ok,
        }
        for r in records
    ]
    pd.DataFrame(rows).to_csv(
        os.path.join(out_dir, "forecasts.csv"), index=False, float_format=FLOAT_FMT
    )


def read_forecasts(path) -> list[ForecastRecord]:
    with open(path) as fh:
        raw = json.load(fh)
    return [ForecastRecord(**{**d, "quantiles": tuple(d["quantiles"])}) for d in raw]


# ---------------------------------------------------------------------------
# In-sample comparison table
# ---------------------------------------------------------------------------

def write_ml_table(rows: list[MlRow], table: dict, bundle: dict[str, MetalData], out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _json_dump(table, os.path.join(out_dir, "ml_table.json"))
    metals = sorted({r.metal for r in rows}, key=metal_sort_key(bundle))
    models = sorted({r.model for r in rows}, key=list(MODEL_LABELS).index)
    lookup = {(r.metal, r.model): r for r in rows}
    recs = []
    for metal in metals:
        entry = {"metal": metal, "category": bundle[metal].category}
        best = table[metal]["best_model"]
        for model in models:
            r = lookup.get((metal, model))
            if r is None:
                continue
            cell = f"{r.log_ml:.1f} ({r.nse:.2f})"
            if model == best:
                cell = f"**{cell}**"
            entry[MODEL_LABELS[model]] = cell
        for bench in ("GARCH", "SV2"):
            bf = table[metal].get(f"bf_vs_{bench}")
            if bf:
                entry[f"2logBF vs {MODEL_LABELS[bench]}"] = f"{bf['two_log_bf']:.1f} ({bf['category']})"
        recs.append(entry)
    pd.DataFrame(recs).to_csv(os.path.join(out_dir, "ml_table.csv"), index=False)


# ---------------------------------------------------------------------------
# Loss tables (relative to the benchmark, with significance stars)
# ---------------------------------------------------------------------------

def write_loss_tables(evaluation: dict, bundle: dict[str, MetalData], out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    payload = {
        "benchmark": evaluation["benchmark"],
        "point_wins": evaluation["point_wins"],
        "density_wins": evaluation["density_wins"],
        "tables": {
            name: {
                metal: {
                    model: {
                        "relative": cell.relative,
                        "stars": cell.stars,
                        "dm_statistic": cell.dm_statistic,
                        "dm_pvalue": cell.dm_pvalue,
                        "raw_loss": cell.raw_loss,
                        "benchmark_loss": cell.benchmark_loss,
                    }
                    for model, cell in row.items()
                }
                for metal, row in table.items()
            }
            for name, table in evaluation["tables"].items()
        },
    }
    _json_dump(payload, os.path.join(out_dir, "loss_tables.json"))
    key = metal_sort_key(bundle)
    for name, table in evaluation["tables"].items():
        recs = []
        for metal in sorted(table, key=key):
            entry = {"metal": metal, "category": bundle[metal].category}
            for model, cell in table[metal].items():
                entry[MODEL_LABELS[model]] = f"{cell.relative:.4f}{cell.stars}"
            recs.append(entry)
        pd.DataFrame(recs).to_csv(os.path.join(out_dir, f"table_{name}.csv"), index=False)


# ---------------------------------------------------------------------------
# Feature and instance-space artifacts
# ---------------------------------------------------------------------------

def write_feature_outputs(
    features: FeatureMatrix, space: InstanceSpace, bundle: dict[str, MetalData], out_dir
) -> None:
    os.makedirs(out_dir, exist_ok=True)
    metals = list(features.metal_ids)
    cats = [bundle[m].category for m in metals]
    raw = pd.DataFrame(features.raw, columns=FEATURE_NAMES)
    raw.insert(0, "metal", metals)
    raw.insert(1, "category", cats)
    raw.to_csv(os.path.join(out_dir, "features_raw.csv"), index=False, float_format=FLOAT_FMT)
    norm = pd.DataFrame(features.normalized, columns=FEATURE_NAMES)
    norm.insert(0, "metal", metals)
    norm.insert(1, "category", cats)
    norm.to_csv(
        os.path.join(out_dir, "features_normalized.csv"), index=False, float_format=FLOAT_FMT
    )
    scatter = pd.DataFrame(space.scores, columns=["PC1", "PC2"])
    scatter.insert(0, "metal", metals)
    scatter.insert(1, "category", cats)
    scatter.to_csv(os.path.join(out_dir, "instance_space.csv"), index=False, float_format=FLOAT_FMT)
    pd.DataFrame(space.loadings, columns=FEATURE_NAMES, index=["PC1", "PC2"]).to_csv(
        os.path.join(out_dir, "loadings.csv"), float_format=FLOAT_FMT
    )
    pd.DataFrame(space.r2_table, columns=["PC1", "PC2"], index=FEATURE_NAMES).to_csv(
        os.path.join(out_dir, "r2_table.csv"), float_format=FLOAT_FMT
    )
    _json_dump(
        {
            "variance_explained": space.variance_explained,
            "eigenvalue_shares": space.eigenvalue_shares,
        },
        os.path.join(out_dir, "variance_explained.json"),
    )


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

_CAT_COLORS = {"base": "tab:blue", "precious": "tab:orange", "other": "tab:green"}


def plot_heatmap(features: FeatureMatrix, bundle: dict[str, MetalData], path) -> None:
    metals = list(features.metal_ids)
    order = sorted(range(len(metals)), key=lambda i: metal_sort_key(bundle)(metals[i]))
    data = features.normalized[order]
    labels = [metals[i] for i in order]
    fig, ax = plt.subplots(figsize=(7, 0.45 * len(labels) + 1.5))
    im = ax.imshow(data, aspect="auto", cmap="Greys", vmin=0, vmax=1)
    ax.set_xticks(range(len(FEATURE_NAMES)), FEATURE_NAMES)
    ax.set_yticks(range(len(labels)), labels)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title("Normalized volatility features")
    _savefig(fig, path)


def plot_instance_space(space: InstanceSpace, metals, bundle, path, overlay=None, title=None) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    for i, metal in enumerate(metals):
        cat = bundle[metal].category
        size = 30.0
        if overlay is not None:
            size = 20.0 + 380.0 * float(overlay[i])
        ax.scatter(
            space.scores[i, 0],
            space.scores[i, 1],
            s=size,
            color=_CAT_COLORS.get(cat, "gray"),
            alpha=0.75,
            edgecolors="black",
            linewidths=0.4,
        )
        ax.annotate(metal, (space.scores[i, 0], space.scores[i, 1]), fontsize=7, xytext=(3, 3),
                    textcoords="offset points")
    ax.axhline(0.0, color="gray", lw=0.6)
    ax.axvline(0.0, color="gray", lw=0.6)
    ax.set_xlabel("PC1")
    ax.set_ylabel("PC2")
    if title:
        ax.set_title(title)
    _savefig(fig, path)


def plot_r2_bars(space: InstanceSpace, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.arange(len(FEATURE_NAMES))
    ax.bar(x - 0.2, space.r2_table[:, 0], width=0.4, label="PC1")
    ax.bar(x + 0.2, space.r2_table[:, 1], width=0.4, label="PC2")
    ax.set_xticks(x, FEATURE_NAMES)
    ax.set_ylabel("R$^2$ against the component")
    ax.legend()
    _savefig(fig, path)


def loss_shape_data(n: int = 117):
    """Forecast grid and (MSE, QLIKE) losses for a unit true variance."""
    forecasts = np.linspace(0.1, 3.0, n)
    mse = (1.0 - forecasts) ** 2
    qlike = 1.0 / forecasts + np.log(forecasts) - 1.0
    return forecasts, mse, qlike


def plot_loss_shapes(path) -> None:
    forecasts, mse, qlike = loss_shape_data()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(forecasts, mse, label="MSE", lw=1.6)
    ax.plot(forecasts, qlike, label="QLIKE", lw=1.6)
    ax.axvline(1.0, color="gray", lw=0.6)
    ax.set_xlabel("variance forecast (true variance = 1)")
    ax.set_ylabel("loss")
    ax.set_title("Symmetric vs asymmetric variance losses")
    ax.legend()
    _savefig(fig, path)


def write_report_figures(
    features: FeatureMatrix,
    space: InstanceSpace,
    bundle: dict[str, MetalData],
    out_dir,
    evaluation: dict | None = None,
    ml_table: dict | None = None,
) -> None:
    os.makedirs(out_dir, exist_ok=True)
    metals = list(features.metal_ids)
    plot_heatmap(features, bundle, os.path.join(out_dir, "feature_heatmap.svg"))
    plot_instance_space(space, metals, bundle, os.path.join(out_dir, "instance_space.svg"))
    plot_r2_bars(space, os.path.join(out_dir, "r2_bars.svg"))
    plot_loss_shapes(os.path.join(out_dir, "loss_shapes.svg"))
    for j, fname in enumerate(FEATURE_NAMES):
        plot_instance_space(
            space,
            metals,
            bundle,
            os.path.join(out_dir, f"instance_space_{fname}.svg"),
            overlay=features.normalized[:, j],
            title=f"Instance space sized by {fname}",
        )
    if evaluation is not None:
        max_wins = 4.0
        for model in MODEL_LABELS:
            overlay = [
                min(evaluation["point_wins"].get(m, {}).get(model, 0), max_wins) / max_wins
                for m in metals
            ]
            plot_instance_space(
                space,
                metals,
                bundle,
                os.path.join(out_dir, f"instance_space_wins_{model}.svg"),
                overlay=overlay,
                title=f"Point-forecast wins: {MODEL_LABELS[model]}",
            )
    if ml_table is not None:
        for bench in ("GARCH", "SV2"):
            vals = []
            for m in metals:
                bf = ml_table.get(m, {}).get(f"bf_vs_{bench}")
                vals.append(0.0 if bf is None else max(min(bf["two_log_bf"], 10.0), -10.0) / 20.0 + 0.5)
            plot_instance_space(
                space,
                metals,
                bundle,
                os.path.join(out_dir, f"instance_space_bf_vs_{bench}.svg"),
                overlay=vals,
                title=f"2 log BF of best model vs {MODEL_LABELS[bench]}",
            )


# ---------------------------------------------------------------------------
# Run manifest
# ---------------------------------------------------------------------------

def write_manifest(config_snapshot: dict, fingerprints: dict, out_dir, extra: dict | None = None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "version": __version__,
        "config": config_snapshot,
        "data_fingerprints": fingerprints,
        "seed_scheme": "numpy SeedSequence(master, spawn_key=(task coordinates))",
    }
    if extra:
        manifest.update(extra)
    _json_dump(manifest, os.path.join(out_dir, "manifest.json"))


def write_timing(timings: dict, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "timing.json"), "w") as fh:
        json.dump(timings, fh, sort_keys=True, indent=1)
        fh.write("\n")
