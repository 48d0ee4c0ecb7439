from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from gnnscope import ModelSpec, build_graph


@pytest.fixture
def path_graph():
    """a–b–c path with distinct 2-d features."""
    return build_graph([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [(0, 1), (1, 2)])


@pytest.fixture
def triangle_graph():
    return build_graph([[1.0], [2.0], [3.0]], [(0, 1), (1, 2), (0, 2)])


def make_bundle_doc(spec: ModelSpec, params: dict[str, np.ndarray],
                    dataset_id: str = "karate",
                    format_version: int = 1) -> dict:
    return {
        "format_version": format_version,
        "spec": spec.to_dict(),
        "dataset_id": dataset_id,
        "parameters": [
            {"name": name, "shape": list(np.asarray(v).shape),
             "values": [float(x) for x in np.ravel(v)]}
            for name, v in params.items()
        ],
        "training_metadata": {},
    }


def bundle_bytes(spec: ModelSpec, params: dict[str, np.ndarray], **kw) -> bytes:
    return json.dumps(make_bundle_doc(spec, params, **kw)).encode()


def random_dense_model(rng: np.random.Generator, variant: str, task: str,
                       in_dim: int, hidden: int = 4, classes: int = 2):
    """A small random (spec, params) pair for engine-level tests."""
    head = {"node_classification": "per_node_mlp",
            "graph_classification": "pool_then_mlp",
            "link_prediction": "dot_product"}[task]
    spec = ModelSpec(variant=variant, task=task,
                     gnn_layers=((in_dim, hidden), (hidden, hidden)),
                     head=head)
    params: dict[str, np.ndarray] = {}
    for idx, (din, dout) in enumerate(spec.gnn_layers):
        prefix = f"gnn.{idx}"
        if variant == "gcn":
            params[f"{prefix}.W"] = rng.normal(size=(dout, din)) * 0.6
            params[f"{prefix}.b"] = rng.normal(size=dout) * 0.1
        elif variant == "gat":
            params[f"{prefix}.W"] = rng.normal(size=(dout, din)) * 0.6
            params[f"{prefix}.a"] = rng.normal(size=2 * dout) * 0.4
        else:
            params[f"{prefix}.W_self"] = rng.normal(size=(dout, din)) * 0.6
            params[f"{prefix}.W_neigh"] = rng.normal(size=(dout, din)) * 0.6
            params[f"{prefix}.b"] = rng.normal(size=dout) * 0.1
    if head == "per_node_mlp":
        params["head.0.W"] = rng.normal(size=(classes, hidden)) * 0.5
        params["head.0.b"] = rng.normal(size=classes) * 0.1
    elif head == "pool_then_mlp":
        params["head.0.W"] = rng.normal(size=(hidden, hidden)) * 0.5
        params["head.0.b"] = rng.normal(size=hidden) * 0.1
        params["head.1.W"] = rng.normal(size=(classes, hidden)) * 0.5
        params["head.1.b"] = rng.normal(size=classes) * 0.1
    return spec, params
