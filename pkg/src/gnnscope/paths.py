"""Locations of the shipped fixtures (datasets, weight bundles, schema).

The GNN101_DATA_DIR environment variable overrides the dataset directory;
bundle and schema paths always resolve inside the installed package unless
a caller passes explicit directories.
"""

from __future__ import annotations

import os
from pathlib import Path

_ASSETS = Path(__file__).resolve().parent / "assets"


def assets_dir() -> Path:
    return _ASSETS


def dataset_dir() -> Path:
    override = os.environ.get("GNN101_DATA_DIR")
    if override:
        return Path(override)
    return _ASSETS / "datasets"


def bundle_dir() -> Path:
    return _ASSETS / "bundles"


def golden_dir() -> Path:
    return _ASSETS / "golden"


def trace_schema_path() -> Path:
    return _ASSETS / "schema" / "trace.schema.json"
