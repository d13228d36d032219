"""Bundle loading: raw daily CSVs plus CPI into prepared per-metal data."""

from __future__ import annotations

import glob
import hashlib
import json
import os

from ..errors import DataError
from ..ingest import MetalData, prepare_metal, read_cpi_csv, read_price_csv, write_monthly_csv


def load_bundle(data_dir) -> dict[str, MetalData]:
    """Prepare every metal in a data directory.

    A ``bundle.json`` manifest (as written by the synthetic generator) names
    the metals and categories; without one, every ``*.csv`` except
    ``cpi.csv`` is treated as a daily price file with category ``other``.
    """
    manifest_path = os.path.join(data_dir, "bundle.json")
    cpi = read_cpi_csv(os.path.join(data_dir, "cpi.csv"))
    bundle: dict[str, MetalData] = {}
    if os.path.exists(manifest_path):
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        entries = [(m["name"], m["category"], os.path.join(data_dir, m["file"])) for m in manifest["metals"]]
    else:
        entries = []
        for path in sorted(glob.glob(os.path.join(data_dir, "*.csv"))):
            if os.path.basename(path) == "cpi.csv":
                continue
            name = os.path.splitext(os.path.basename(path))[0]
            entries.append((name, "other", path))
    if not entries:
        raise DataError(f"no price files found in {data_dir}")
    for name, category, path in entries:
        prices = read_price_csv(path, metal_id=name)
        bundle[name] = prepare_metal(prices, cpi, category=category)
    return bundle


def write_ingest_outputs(bundle: dict[str, MetalData], out_dir) -> None:
    """Emit the monthly series CSVs for every metal."""
    os.makedirs(out_dir, exist_ok=True)
    for name, data in sorted(bundle.items()):
        for kind, series in (
            ("real_price", data.monthly_price),
            ("monthly_return", data.monthly_return),
            ("rv", data.rv),
            ("rg2star", data.rg2star),
        ):
            write_monthly_csv(series, os.path.join(out_dir, f"{name}_{kind}.csv"))


def data_fingerprints(data_dir) -> dict[str, str]:
    """SHA-256 of every CSV input, for the run manifest."""
    out = {}
    for path in sorted(glob.glob(os.path.join(data_dir, "*.csv"))):
        with open(path, "rb") as fh:
            out[os.path.basename(path)] = hashlib.sha256(fh.read()).hexdigest()
    return out
