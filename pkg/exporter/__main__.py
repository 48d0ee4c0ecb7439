"""Build everything the engine ships: fixtures, bundles, golden cases.

Usage: python -m exporter [--assets src/gnnscope/assets] [--skip-datasets]
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

import numpy as np
import torch

from .datasets import generate_all, load_mutag, load_node_edge
from .export import emit_golden_cases, export_bundle
from .train import (
    HIDDEN,
    train_graph_classifier,
    train_link_scorer,
    train_node_classifier,
)

ZOO = [
    # (variant, task, dataset, train seed, golden selectors, golden seed, overrides)
    ("gcn", "node_classification", "karate", 101, [0, 16, 33], 0, {}),
    ("gcn", "graph_classification", "mutag", 102, [0, 3, 7, 10], 0, {}),
    ("gcn", "link_prediction", "twitch", 103, [(0, 1), (10, 500), (42, 43)], 0,
     {"epochs": 400, "lr": 0.02}),
    ("gat", "node_classification", "karate", 104, [0, 5, 33], 0, {}),
    ("gat", "graph_classification", "mutag", 105, [1, 4, 8], 0, {}),
    ("gat", "link_prediction", "karate", 106, [(0, 33), (1, 2), (5, 16)], 0, {}),
    ("sage", "node_classification", "twitch", 107, [0, 57, 3301], 11, {}),
    ("sage", "graph_classification", "mutag", 108, [2, 5, 9], 7, {}),
    ("sage", "link_prediction", "twitch", 109, [(0, 2), (7, 11), (100, 2000)], 13,
     {"epochs": 400, "lr": 0.02}),
]

SHORT_TASK = {"node_classification": "node", "graph_classification": "graph",
              "link_prediction": "link"}


def main() -> None:
    parser = argparse.ArgumentParser(prog="exporter")
    parser.add_argument("--assets", default="src/gnnscope/assets")
    parser.add_argument("--skip-datasets", action="store_true",
                        help="reuse existing dataset fixtures")
    args = parser.parse_args()

    assets = Path(args.assets)
    data_root = assets / "datasets"
    bundles = assets / "bundles"
    golden = assets / "golden"
    bundles.mkdir(parents=True, exist_ok=True)
    golden.mkdir(parents=True, exist_ok=True)

    if not args.skip_datasets:
        print("generating dataset fixtures ...")
        generate_all(data_root)

    datasets = {
        "karate": load_node_edge(data_root, "karate", one_hot_identity=True),
        "twitch": load_node_edge(data_root, "twitch"),
        "mutag": load_mutag(data_root),
    }

    manifest: dict = {
        "framework": {"torch": torch.__version__, "numpy": np.__version__},
        "bundles": {},
    }
    for variant, task, dataset_id, train_seed, selectors, golden_seed, kw in ZOO:
        started = time.time()
        data = datasets[dataset_id]
        if task == "node_classification":
            model, accuracy = train_node_classifier(variant, data, train_seed, **kw)
            in_dim = data.features.shape[1]
        elif task == "graph_classification":
            model, accuracy = train_graph_classifier(variant, data, train_seed, **kw)
            in_dim = data[0].features.shape[1]
        else:
            model, accuracy = train_link_scorer(variant, data, train_seed, **kw)
            in_dim = data.features.shape[1]

        name = f"{variant}_{SHORT_TASK[task]}_{dataset_id}"
        metadata = {
            "framework": f"torch {torch.__version__}",
            "training_seed": str(train_seed),
            "train_accuracy": f"{accuracy:.3f}",
            "optimizer": "adam",
            "weight_decay": "5e-4",
        }
        if variant == "gat":
            metadata["leaky_slope"] = "0.2"
        if variant == "sage":
            metadata["sample_size"] = "25"
        if dataset_id == "twitch":
            metadata["feature_note"] = (
                "8 numeric account attributes from the synthetic fixture"
            )

        dims = [(in_dim, HIDDEN), (HIDDEN, HIDDEN)]
        bundle_path = bundles / f"{name}.json"
        count = export_bundle(model, variant, task, dataset_id, dims,
                              metadata, bundle_path)
        golden_path = golden / f"{name}.golden.json"
        case_count = emit_golden_cases(model, variant, task, dataset_id,
                                       bundle_path.name, data, selectors,
                                       golden_seed, golden_path)
        manifest["bundles"][bundle_path.name] = {
            "parameter_count": count,
            "golden_cases": case_count,
            "golden_file": golden_path.name,
            "train_accuracy": round(accuracy, 3),
        }
        print(f"  {name}: acc={accuracy:.3f} tensors={count} "
              f"golden={case_count} ({time.time() - started:.1f}s)")

    (golden / "export_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print("wrote", golden / "export_manifest.json")


if __name__ == "__main__":
    main()
