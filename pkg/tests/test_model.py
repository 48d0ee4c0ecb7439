"""model-assembly: bundle validation, assembly, prediction properties."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from gnnscope import (
    ModelSpec,
    assemble,
    build_graph,
    load_weight_bundle,
    permute_graph,
)
from gnnscope.errors import (
    EmptyGraph,
    InvalidTarget,
    NonFiniteWeight,
    ParseError,
    ShapeMismatch,
    SpecMismatch,
    TooLargeToTrace,
    UnsupportedVersion,
)

from conftest import bundle_bytes, make_bundle_doc, random_dense_model


def _gcn_spec(in_dim=2, hidden=3, classes=2, task="node_classification",
              head="per_node_mlp"):
    return ModelSpec(variant="gcn", task=task,
                     gnn_layers=((in_dim, hidden), (hidden, hidden)), head=head)


def _gcn_params(rng, spec, classes=2):
    params = {}
    for idx, (din, dout) in enumerate(spec.gnn_layers):
        params[f"gnn.{idx}.W"] = rng.normal(size=(dout, din))
        params[f"gnn.{idx}.b"] = rng.normal(size=dout)
    params["head.0.W"] = rng.normal(size=(classes, spec.gnn_out_dim))
    params["head.0.b"] = rng.normal(size=classes)
    return params


# -- bundle loading -----------------------------------------------------------

def test_load_valid_bundle():
    rng = np.random.default_rng(0)
    spec = _gcn_spec()
    bundle = load_weight_bundle(bundle_bytes(spec, _gcn_params(rng, spec)))
    assert bundle.spec == spec
    assert bundle.dataset_id == "karate"
    assert len(bundle.parameters) == 6


def test_shape_mismatch_names_tensor():
    rng = np.random.default_rng(1)
    spec = _gcn_spec()
    params = _gcn_params(rng, spec)
    doc = make_bundle_doc(spec, params)
    for entry in doc["parameters"]:
        if entry["name"] == "gnn.1.W":
            entry["values"].append(0.0)  # 3x3 declared, 10 values given
    with pytest.raises(ShapeMismatch) as err:
        load_weight_bundle(json.dumps(doc))
    assert "gnn.1.W" in str(err.value)


def test_declared_shape_disagreeing_with_spec_names_tensor():
    rng = np.random.default_rng(2)
    spec = _gcn_spec()
    params = _gcn_params(rng, spec)
    params["gnn.0.W"] = rng.normal(size=(3, 5))  # spec says (3, 2)
    with pytest.raises(ShapeMismatch) as err:
        load_weight_bundle(bundle_bytes(spec, params))
    assert "gnn.0.W" in str(err.value)


def test_unsupported_version():
    rng = np.random.default_rng(3)
    spec = _gcn_spec()
    raw = bundle_bytes(spec, _gcn_params(rng, spec), format_version=999)
    with pytest.raises(UnsupportedVersion):
        load_weight_bundle(raw)


def test_non_finite_weight_rejected():
    rng = np.random.default_rng(4)
    spec = _gcn_spec()
    params = _gcn_params(rng, spec)
    params["gnn.0.b"] = np.array([np.nan, 0.0, 0.0])
    with pytest.raises(NonFiniteWeight) as err:
        load_weight_bundle(bundle_bytes(spec, params))
    assert "gnn.0.b" in str(err.value)


def test_missing_tensor_rejected():
    rng = np.random.default_rng(5)
    spec = _gcn_spec()
    params = _gcn_params(rng, spec)
    del params["gnn.1.b"]
    with pytest.raises(ShapeMismatch) as err:
        load_weight_bundle(bundle_bytes(spec, params))
    assert "gnn.1.b" in str(err.value)


def test_stray_tensor_rejected():
    rng = np.random.default_rng(6)
    spec = _gcn_spec()
    params = _gcn_params(rng, spec)
    params["gnn.7.W"] = rng.normal(size=(2, 2))
    with pytest.raises(ShapeMismatch):
        load_weight_bundle(bundle_bytes(spec, params))


def test_malformed_json_is_parse_error():
    with pytest.raises(ParseError):
        load_weight_bundle(b"{not json")


def test_task_head_mismatch_rejected():
    with pytest.raises(ParseError):
        ModelSpec(variant="gcn", task="graph_classification",
                  gnn_layers=((2, 3),), head="per_node_mlp")


def test_non_composing_gnn_dims_rejected():
    with pytest.raises(ShapeMismatch):
        ModelSpec(variant="gcn", task="node_classification",
                  gnn_layers=((2, 3), (4, 3)), head="per_node_mlp")


# -- assemble ------------------------------------------------------------------

def test_assemble_spec_mismatch():
    rng = np.random.default_rng(7)
    spec = _gcn_spec()
    bundle = load_weight_bundle(bundle_bytes(spec, _gcn_params(rng, spec)))
    other = ModelSpec(variant="gat", task="node_classification",
                      gnn_layers=spec.gnn_layers, head="per_node_mlp")
    with pytest.raises(SpecMismatch):
        assemble(other, bundle)


def test_assemble_layer_count():
    rng = np.random.default_rng(8)
    spec, params = random_dense_model(rng, "gcn", "graph_classification", 3)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    # 2 GNN layers + pool + 2 head layers
    assert model.layer_count == 5


# -- catalog -------------------------------------------------------------------

def test_catalog_covers_grid_with_stable_ordering():
    from gnnscope import list_models

    entries = list_models()
    combos = {(e.variant, e.task) for e in entries}
    assert len(combos) == 9  # full 3 variants x 3 tasks coverage
    keys = [(e.variant, e.task, e.dataset_id) for e in entries]
    assert keys == sorted(keys)
    assert entries == list_models()  # stable across calls


# -- predict -------------------------------------------------------------------

def test_zero_network_uniform_probabilities():
    spec = ModelSpec(variant="gcn", task="graph_classification",
                     gnn_layers=((2, 3),), head="pool_then_mlp")
    params = {
        "gnn.0.W": np.zeros((3, 2)), "gnn.0.b": np.zeros(3),
        "head.0.W": np.zeros((4, 3)), "head.0.b": np.zeros(4),
    }
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph([[1.0, -1.0]], [])
    prediction, _ = model.predict(g, "graph")
    assert prediction.logits == (0.0, 0.0, 0.0, 0.0)
    assert prediction.probabilities == pytest.approx([0.25] * 4)
    assert prediction.predicted_class == 0  # lowest-index tie break


def test_self_link_target_rejected():
    rng = np.random.default_rng(9)
    spec, params = random_dense_model(rng, "gcn", "link_prediction", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph([[1.0, 0.0]] * 6, [(0, 1), (1, 2), (3, 4)])
    with pytest.raises(InvalidTarget):
        model.predict(g, (5, 5))


def test_invalid_targets():
    rng = np.random.default_rng(10)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph([[1.0, 0.0]] * 3, [(0, 1)])
    with pytest.raises(InvalidTarget):
        model.predict(g, 17)
    with pytest.raises(InvalidTarget):
        model.predict(g, "graph")


def test_empty_graph_rejected():
    rng = np.random.default_rng(11)
    spec, params = random_dense_model(rng, "gcn", "graph_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph([], [])
    with pytest.raises(EmptyGraph):
        model.predict(g, "graph")


def test_feature_dim_mismatch_rejected():
    rng = np.random.default_rng(12)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 4)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph([[1.0, 0.0]] * 3, [(0, 1)])
    with pytest.raises(ShapeMismatch):
        model.predict(g, 0)


def test_link_probabilities_are_logistic_pair():
    rng = np.random.default_rng(13)
    spec, params = random_dense_model(rng, "gcn", "link_prediction", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph(rng.normal(size=(6, 2)).tolist(),
                    [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)])
    prediction, _ = model.predict(g, (0, 5))
    raw = prediction.logits[0]
    assert prediction.logits[1] == 0.0
    p = 1.0 / (1.0 + math.exp(-raw))
    assert prediction.probabilities[0] == pytest.approx(p, abs=1e-12)
    assert prediction.probabilities[1] == pytest.approx(1 - p, abs=1e-12)
    assert sum(prediction.probabilities) == pytest.approx(1.0, abs=1e-6)


def test_predicted_class_invariant_under_logit_shift():
    rng = np.random.default_rng(14)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 3)
    g = build_graph(rng.normal(size=(5, 3)).tolist(), [(0, 1), (1, 2), (3, 4)])
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    base, _ = model.predict(g, 2)

    shifted = dict(params)
    shifted["head.0.b"] = np.asarray(params["head.0.b"]) + 7.25
    model2 = assemble(spec, load_weight_bundle(bundle_bytes(spec, shifted)))
    moved, _ = model2.predict(g, 2)
    assert moved.predicted_class == base.predicted_class
    assert moved.logits != base.logits


def test_repeated_predict_bitwise_identical():
    rng = np.random.default_rng(15)
    spec, params = random_dense_model(rng, "sage", "node_classification", 3)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph(rng.normal(size=(30, 3)).tolist(),
                    [(0, i) for i in range(1, 30)])
    p1, _ = model.predict(g, 0, rng_seed=5)
    p2, _ = model.predict(g, 0, rng_seed=5)
    assert p1.logits == p2.logits
    assert p1.trace_id == p2.trace_id


@pytest.mark.parametrize("variant", ["gcn", "gat"])
def test_graph_classification_permutation_invariant(variant):
    rng = np.random.default_rng(16)
    spec, params = random_dense_model(rng, variant, "graph_classification", 3)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph(rng.normal(size=(9, 3)).tolist(),
                    [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7),
                     (7, 8), (0, 8), (2, 6)])
    base, _ = model.predict(g, "graph")
    for _ in range(5):
        perm = list(rng.permutation(9))
        moved, _ = model.predict(permute_graph(g, perm), "graph")
        assert np.allclose(moved.logits, base.logits, atol=1e-5)


@pytest.mark.parametrize("variant", ["gcn", "gat"])
def test_node_classification_permutation_equivariant(variant):
    rng = np.random.default_rng(17)
    spec, params = random_dense_model(rng, variant, "node_classification", 3)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = build_graph(rng.normal(size=(8, 3)).tolist(),
                    [(0, 1), (1, 2), (2, 3), (4, 5), (5, 6), (6, 7), (0, 7)])
    for node in (0, 3, 6):
        base, _ = model.predict(g, node)
        perm = list(rng.permutation(8))
        moved, _ = model.predict(permute_graph(g, perm), perm[node])
        assert np.allclose(moved.logits, base.logits, atol=1e-5)


# -- extraction ------------------------------------------------------------------

def _chain_graph(rng, n, dim=2):
    return build_graph(rng.normal(size=(n, dim)).tolist(),
                       [(i, i + 1) for i in range(n - 1)])


def test_large_graph_extracts_k_hop_before_tracing():
    rng = np.random.default_rng(18)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = _chain_graph(rng, 600)
    prediction, trace = model.predict(g, 300)
    # 2 GNN layers -> 2-hop neighborhood of node 300 on a chain: 5 nodes
    assert len(trace.graph_node_ids) == 5
    assert trace.graph_node_ids == ("298", "299", "300", "301", "302")
    assert prediction.target == 300


def test_small_graph_not_extracted():
    rng = np.random.default_rng(19)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = _chain_graph(rng, 40)
    _, trace = model.predict(g, 20)
    assert len(trace.graph_node_ids) == 40


def test_graph_task_never_extracts():
    rng = np.random.default_rng(20)
    spec, params = random_dense_model(rng, "gcn", "graph_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = _chain_graph(rng, 550)
    _, trace = model.predict(g, "graph")
    assert len(trace.graph_node_ids) == 550


def test_too_large_to_trace():
    rng = np.random.default_rng(21)
    spec, params = random_dense_model(rng, "gcn", "node_classification", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = _chain_graph(rng, 40)
    with pytest.raises(TooLargeToTrace):
        model.predict(g, 20, max_trace_nodes=10)


def test_link_extraction_remaps_both_endpoints():
    rng = np.random.default_rng(22)
    spec, params = random_dense_model(rng, "gcn", "link_prediction", 2)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    g = _chain_graph(rng, 600)
    prediction, trace = model.predict(g, (100, 101))
    assert prediction.target == (100, 101)
    assert set(trace.graph_node_ids) == {str(i) for i in range(98, 104)}
