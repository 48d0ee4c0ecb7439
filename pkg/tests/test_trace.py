"""trace-recorder: stage ordering, provenance, lookup, serialization."""

from __future__ import annotations

import json

import numpy as np
import pytest

from gnnscope import (
    ModelSpec,
    assemble,
    build_graph,
    cell_provenance,
    load_weight_bundle,
    neighborhood_highlight,
    parse_trace,
    sample_neighbors,
    serialize_trace,
    symbol_lookup,
)
from gnnscope.errors import (
    InputStepHasNoProvenance,
    ShapeMismatch,
    StageOrderViolation,
    UnknownLayer,
    UnknownNode,
    UnknownStep,
)
from gnnscope.trace import SYMBOLS, TraceRecorder

from conftest import bundle_bytes, random_dense_model
from oracles import recompute_cell


def _predict(variant="gcn", task="node_classification", seed=0, target=1,
             graph=None, rng=None):
    rng = rng or np.random.default_rng(123)
    if graph is None:
        graph = build_graph(
            rng.normal(size=(5, 3)).astype(np.float32).tolist(),
            [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)],
        )
    spec, params = random_dense_model(rng, variant, task, graph.feature_dim)
    model = assemble(spec, load_weight_bundle(bundle_bytes(spec, params)))
    prediction, trace = model.predict(graph, target, rng_seed=seed)
    return graph, model, prediction, trace


# -- recorder ------------------------------------------------------------------

def test_record_first_step_accepted():
    rec = TraceRecorder()
    L = rec.begin_layer("gcn", "gcn_conv")
    sid = rec.record_step(L, None, "W", (2, 2), np.eye(2), 0)
    assert sid == "L0.g.W"


def test_activation_below_agg_stage_rejected():
    rec = TraceRecorder()
    L = rec.begin_layer("gcn", "gcn_conv")
    rec.record_step(L, 0, "agg", (2,), [1.0, 2.0], 2)
    with pytest.raises(StageOrderViolation):
        rec.record_step(L, 0, "activation", (2,), [1.0, 2.0], 1)


def test_agg_above_activation_stage_rejected():
    rec = TraceRecorder()
    L = rec.begin_layer("gcn", "gcn_conv")
    rec.record_step(L, 0, "activation", (1,), [1.0], 5)
    with pytest.raises(StageOrderViolation):
        rec.record_step(L, 1, "agg", (1,), [1.0], 7)


def test_gat_chain_allows_wx_before_agg():
    rec = TraceRecorder()
    L = rec.begin_layer("gat", "gat_score_1")
    rec.record_step(L, 0, "Wx", (1,), [1.0], 2)
    rec.record_step(L, 0, "agg", (1,), [1.0], 5)  # agg after Wx is the GAT order
    with pytest.raises(StageOrderViolation):
        rec.record_step(L, 1, "Wx", (1,), [1.0], 6)  # but never after an agg


def test_record_step_shape_checked():
    rec = TraceRecorder()
    L = rec.begin_layer("gcn", "gcn_conv")
    with pytest.raises(ShapeMismatch):
        rec.record_step(L, 0, "agg", (3,), [1.0, 2.0], 2)


def test_gcn_layer_has_one_activation_per_node(path_graph=None):
    graph, _, _, trace = _predict()
    acts = symbol_lookup(trace, 0, "activation")
    assert len(acts) == graph.node_count


# -- symbol lookup ---------------------------------------------------------------

def test_symbol_lookup_gcn_bias_single():
    _, _, _, trace = _predict("gcn")
    assert symbol_lookup(trace, 0, "b") == ["L0.g.b"]


def test_symbol_lookup_gcn_alpha_empty():
    _, _, _, trace = _predict("gcn")
    assert symbol_lookup(trace, 0, "alpha") == []


def test_symbol_lookup_gat_alpha_per_node():
    graph, _, _, trace = _predict("gat")
    assert len(symbol_lookup(trace, 0, "alpha")) == graph.node_count


def test_symbol_lookup_unknown_layer():
    _, _, _, trace = _predict()
    with pytest.raises(UnknownLayer):
        symbol_lookup(trace, 99, "agg")


@pytest.mark.parametrize("variant", ["gcn", "gat", "sage"])
def test_symbols_partition_steps(variant):
    _, _, _, trace = _predict(variant)
    for L, layer in enumerate(trace.layers):
        ids = []
        for symbol in sorted(SYMBOLS):
            ids.extend(symbol_lookup(trace, L, symbol))
        assert sorted(ids) == sorted(s.step_id for s in layer.steps)
        assert len(ids) == len(set(ids))


# -- neighborhood highlight -------------------------------------------------------

def test_highlight_isolated_gcn_node():
    g = build_graph([[1.0, 0.0, 0.0]], [])
    _, _, _, trace = _predict(graph=g, target=0)
    members, coeffs = neighborhood_highlight(trace, 0, 0)
    assert members == [0]
    assert coeffs == [1.0]


def test_highlight_gat_sums_to_one():
    graph, _, _, trace = _predict("gat")
    for node in range(graph.node_count):
        _, coeffs = neighborhood_highlight(trace, 1, node)
        assert sum(coeffs) == pytest.approx(1.0, abs=1e-6)


def test_highlight_gcn_equals_recorded_coefficients():
    from gnnscope import gcn_coefficient

    graph, _, _, trace = _predict("gcn")
    for node in range(graph.node_count):
        members, coeffs = neighborhood_highlight(trace, 0, node)
        for member, coeff in zip(members, coeffs):
            assert coeff == gcn_coefficient(graph, node, member)


def test_highlight_sage_hub_sampled_plus_self():
    rng = np.random.default_rng(77)
    n = 51
    edges = [(0, i) for i in range(1, n)]
    graph = build_graph(rng.normal(size=(n, 3)).astype(np.float32).tolist(),
                        edges)
    _, _, _, trace = _predict("sage", graph=graph, target=0, seed=9, rng=rng)
    members, coeffs = neighborhood_highlight(trace, 0, 0)
    assert len(members) == 26  # 25 sampled + the self term
    expected = sample_neighbors(graph, 0, 25, 9)  # layer 0 seed = base + 0
    assert [m for m in members if m != 0] == expected
    assert coeffs[members.index(0)] == 1.0


def test_highlight_rejects_non_gnn_layer_and_unknown_node():
    _, _, _, trace = _predict()
    head_index = len(trace.layers) - 1
    with pytest.raises(UnknownLayer):
        neighborhood_highlight(trace, head_index, 0)
    with pytest.raises(UnknownNode):
        neighborhood_highlight(trace, 0, 999)


# -- provenance --------------------------------------------------------------------

def _recompute(trace, prov) -> float:
    sources = [float(trace.step(s).values[c]) for s, c, _ in prov.terms]
    coefficients = [coeff for _, _, coeff in prov.terms]
    return recompute_cell(prov.op_kind, sources, coefficients)


def test_activation_cell_is_max_zero():
    _, _, _, trace = _predict()
    sid = symbol_lookup(trace, 0, "activation")[0]
    prov = cell_provenance(trace, sid, 0)
    assert prov.op_kind == "max_zero"
    assert len(prov.terms) == 1


def test_gcn_agg_cell_weighted_sum_structure():
    from gnnscope import gcn_coefficient

    graph, _, _, trace = _predict("gcn")
    node = 1
    sid = f"L0.n{node}.agg"
    prov = cell_provenance(trace, sid, 0)
    assert prov.op_kind == "weighted_sum"
    members = sorted(set(graph.neighbors[node]) | {node})
    assert len(prov.terms) == len(members)
    for (src, _, coeff), member in zip(prov.terms, members):
        assert src == f"L0.n{member}.x_j"
        assert coeff == gcn_coefficient(graph, node, member)


def test_input_and_parameter_steps_have_no_provenance():
    _, _, _, trace = _predict()
    for sid in ("L0.g.W", "L0.g.b", "L0.n0.x_j", "L0.n1.coeff"):
        with pytest.raises(InputStepHasNoProvenance):
            cell_provenance(trace, sid, 0)


def test_unknown_step_and_cell():
    _, _, _, trace = _predict()
    with pytest.raises(UnknownStep):
        cell_provenance(trace, "L0.n0.nope", 0)
    with pytest.raises(UnknownStep):
        cell_provenance(trace, "L0.n0.agg", 99)


@pytest.mark.parametrize("variant,task", [
    ("gcn", "node_classification"),
    ("gcn", "graph_classification"),
    ("gat", "node_classification"),
    ("gat", "link_prediction"),
    ("sage", "graph_classification"),
    ("sage", "link_prediction"),
])
def test_provenance_recomputes_every_cell(variant, task):
    target = {"node_classification": 2, "graph_classification": "graph",
              "link_prediction": (0, 3)}[task]
    _, _, _, trace = _predict(variant, task, target=target, seed=4)
    checked = 0
    for layer in trace.layers:
        for step in layer.steps:
            for cell in range(step.values.size):
                try:
                    prov = cell_provenance(trace, step.step_id, cell)
                except InputStepHasNoProvenance:
                    continue
                got = _recompute(trace, prov)
                want = float(step.values[cell])
                assert abs(got - want) < 1e-6, (step.step_id, cell)
                checked += 1
    assert checked > 50


def test_provenance_works_on_deserialized_trace():
    _, _, _, trace = _predict("gat")
    revived = parse_trace(serialize_trace(trace))
    sid = symbol_lookup(revived, 1, "alpha")[0]
    step = revived.step(sid)
    for cell in range(step.values.size):
        prov = cell_provenance(revived, sid, cell)
        assert prov.op_kind == "softmax_cell"
        got = _recompute(revived, prov)
        assert abs(got - float(step.values[cell])) < 1e-6


# -- serialization -------------------------------------------------------------------

def test_serialize_round_trip():
    _, _, _, trace = _predict()
    raw = serialize_trace(trace)
    revived = parse_trace(raw)
    assert serialize_trace(revived) == raw
    assert revived.trace_id == trace.trace_id


def test_serialize_deterministic():
    _, _, _, trace = _predict()
    assert serialize_trace(trace) == serialize_trace(trace)


def test_identical_runs_identical_bytes():
    # hub graph so the sampler actually fires and the seed matters
    rng = np.random.default_rng(700)
    edges = [(0, i) for i in range(1, 40)] + [(1, 2), (2, 3)]
    features = rng.normal(size=(40, 3)).astype(np.float32).tolist()
    g1 = build_graph(features, edges)
    g2 = build_graph(features, edges)
    _, _, _, t1 = _predict("sage", seed=3, graph=g1,
                           rng=np.random.default_rng(0))
    _, _, _, t2 = _predict("sage", seed=3, graph=g2,
                           rng=np.random.default_rng(0))
    assert serialize_trace(t1) == serialize_trace(t2)
    _, _, _, t3 = _predict("sage", seed=4, graph=g1,
                           rng=np.random.default_rng(0))
    assert serialize_trace(t3) != serialize_trace(t1)


def test_serialized_document_is_schema_shaped():
    _, _, _, trace = _predict()
    doc = json.loads(serialize_trace(trace))
    assert doc["schema_version"] == 1
    assert set(doc) == {"schema_version", "trace_id", "model", "graph",
                        "layers", "final_step_id"}
    assert doc["final_step_id"] in {
        s["step_id"] for layer in doc["layers"] for s in layer["steps"]
    }


def test_final_logits_step_equals_prediction_logits():
    _, _, prediction, trace = _predict()
    final = trace.step(trace.final_step_id)
    assert tuple(float(v) for v in final.values) == prediction.logits
