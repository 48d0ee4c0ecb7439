"""dataset-store: fixture loading, graph JSON ingestion, target selection."""

from __future__ import annotations

import json

import numpy as np
import pytest

from gnnscope import (
    graph_to_json,
    k_hop_subgraph,
    list_models,
    load_dataset,
    load_weight_bundle_file,
    parse_graph_json,
    select_inference_target,
)
from gnnscope.datasets import verify_manifest
from gnnscope.errors import (
    CorruptDataFile,
    InvalidSelector,
    ParseError,
    SchemaError,
    UnknownDataset,
)
from gnnscope.paths import dataset_dir

from oracles import bfs_nodes


# -- bundled datasets -----------------------------------------------------------

def test_karate_is_single_graph():
    descriptor, graphs = load_dataset("karate")
    assert descriptor.kind == "single_graph"
    assert descriptor.graph_count == 1
    assert len(graphs) == 1


def test_karate_node_count_matches_node_file():
    # independent line count of the bundled fixture
    lines = (dataset_dir() / "karate" / "nodes.txt").read_text().splitlines()
    _, graphs = load_dataset("karate")
    assert graphs[0].node_count == len([ln for ln in lines if ln.strip()]) == 34


def test_karate_neighborhood_from_raw_edge_scan():
    from gnnscope import neighborhood

    _, graphs = load_dataset("karate")
    g = graphs[0]
    raw = (dataset_dir() / "karate" / "edges.txt").read_text().split()
    pairs = list(zip(raw[::2], raw[1::2]))
    deg0 = sum(1 for u, v in pairs if "0" in (u, v))
    assert len(neighborhood(g, 0).members) == deg0 + 1


def test_mutag_binary_graph_labels():
    descriptor, graphs = load_dataset("mutag")
    assert descriptor.kind == "graph_collection"
    labels = {g.graph_label for g in graphs}
    # label-set scan of the bundled file agrees
    docs = json.loads((dataset_dir() / "mutag" / "graphs.json").read_text())
    assert labels == {doc["graph_label"] for doc in docs} == {0, 1}


def test_twitch_is_large_single_graph():
    descriptor, graphs = load_dataset("twitch")
    assert descriptor.kind == "single_graph"
    assert graphs[0].node_count > 500  # must trigger k-hop extraction
    assert descriptor.feature_dim == 8


def test_unknown_dataset():
    with pytest.raises(UnknownDataset):
        load_dataset("cora")


def test_loading_deterministic():
    _, a = load_dataset("karate")
    _, b = load_dataset("karate")
    assert a[0].equals(b[0])


def test_manifest_checksums_hold():
    results = verify_manifest()
    assert results and all(results.values())


def test_env_var_overrides_dataset_dir(tmp_path, monkeypatch):
    (tmp_path / "karate").mkdir()
    (tmp_path / "karate" / "meta.json").write_text(
        '{"class_names": ["a", "b"]}')
    (tmp_path / "karate" / "nodes.txt").write_text("0 0\n1 1\n")
    (tmp_path / "karate" / "edges.txt").write_text("0 1\n")
    monkeypatch.setenv("GNN101_DATA_DIR", str(tmp_path))
    _, graphs = load_dataset("karate")
    assert graphs[0].node_count == 2  # the override dir, not the bundled one


def test_corrupt_data_file_names_path_and_line(tmp_path):
    root = tmp_path
    (root / "karate").mkdir()
    (root / "karate" / "meta.json").write_text('{"class_names": ["a", "b"]}')
    (root / "karate" / "nodes.txt").write_text("0 0\n1 oops\n")
    (root / "karate" / "edges.txt").write_text("0 1\n")
    with pytest.raises(CorruptDataFile) as err:
        load_dataset("karate", root)
    assert "nodes.txt:2" in str(err.value)


# -- graph JSON ingestion ---------------------------------------------------------

def test_parse_two_node_graph():
    doc = {"nodes": [{"id": "a", "features": [1, 0]},
                     {"id": "b", "features": [0, 1]}],
           "edges": [["a", "b"]]}
    g = parse_graph_json(json.dumps(doc).encode())
    assert g.node_count == 2
    assert g.edges == ((0, 1),)
    assert g.node_ids == ("a", "b")


def test_parse_missing_features_names_field():
    doc = {"nodes": [{"id": "a", "features": [1]}, {"id": "b"}],
           "edges": []}
    with pytest.raises(SchemaError) as err:
        parse_graph_json(json.dumps(doc).encode())
    assert "nodes[1].features" in str(err.value)


def test_parse_unknown_edge_id_names_field():
    doc = {"nodes": [{"id": "a", "features": [1]}],
           "edges": [["a", "z"]]}
    with pytest.raises(SchemaError) as err:
        parse_graph_json(json.dumps(doc).encode())
    assert "edges[0]" in str(err.value)


def test_parse_invalid_json():
    with pytest.raises(ParseError):
        parse_graph_json(b"{nope")


def test_parse_symmetrizes_and_drops_self_loops():
    doc = {"nodes": [{"id": "a", "features": [1]},
                     {"id": "b", "features": [1]}],
           "edges": [["a", "b"], ["b", "a"], ["a", "a"]]}
    g = parse_graph_json(json.dumps(doc).encode())
    assert g.edges == ((0, 1),)


def test_parse_strict_mode_rejects_unknown_fields():
    doc = {"nodes": [{"id": "a", "features": [1]}], "edges": [],
           "color": "red"}
    assert parse_graph_json(json.dumps(doc).encode()).node_count == 1
    with pytest.raises(SchemaError) as err:
        parse_graph_json(json.dumps(doc).encode(), strict=True)
    assert "color" in str(err.value)


def test_every_bundled_graph_round_trips():
    for dataset_id in ("karate", "mutag", "twitch"):
        _, graphs = load_dataset(dataset_id)
        for g in graphs:
            revived = parse_graph_json(graph_to_json(g))
            assert revived.equals(g), dataset_id


# -- target selection ---------------------------------------------------------------

def test_select_mutag_graph_index():
    dataset = load_dataset("mutag")
    graph, target = select_inference_target(dataset, "graph_classification", 3)
    assert target == "graph"
    assert graph.equals(dataset[1][3])


def test_select_karate_link_pair():
    dataset = load_dataset("karate")
    graph, target = select_inference_target(dataset, "link_prediction", (0, 33))
    assert target == (0, 33)
    assert graph.node_count == 34


def test_select_rejects_bad_combinations():
    mutag = load_dataset("mutag")
    karate = load_dataset("karate")
    with pytest.raises(InvalidSelector):
        select_inference_target(mutag, "node_classification", 0)
    with pytest.raises(InvalidSelector):
        select_inference_target(karate, "graph_classification", 0)
    with pytest.raises(InvalidSelector):
        select_inference_target(mutag, "graph_classification", 10**6)
    with pytest.raises(InvalidSelector):
        select_inference_target(karate, "node_classification", -3)


def test_twitch_two_hop_extraction_matches_raw_file_bfs():
    dataset = load_dataset("twitch")
    graph, node = select_inference_target(dataset, "node_classification", 57)
    _, index_map = k_hop_subgraph(graph, [node], 2)

    raw = (dataset_dir() / "twitch" / "edges.txt").read_text().split()
    edges = list(zip(map(int, raw[::2]), map(int, raw[1::2])))
    assert set(index_map) == bfs_nodes(edges, [57], 2)


def test_twitch_edge_endpoint_extraction_matches_raw_file_bfs():
    # seeds = both endpoints of an edge, the link-prediction extraction shape
    dataset = load_dataset("twitch")
    graph = dataset[1][0]
    raw = (dataset_dir() / "twitch" / "edges.txt").read_text().split()
    edges = list(zip(map(int, raw[::2]), map(int, raw[1::2])))
    u, v = edges[123]
    _, index_map = k_hop_subgraph(graph, [u, v], 2)
    assert set(index_map) == bfs_nodes(edges, [u, v], 2)


# -- catalog cross-checks --------------------------------------------------------

def test_catalog_feature_dims_match_bundles():
    descriptors = {d: load_dataset(d)[0] for d in ("karate", "mutag", "twitch")}
    for entry in list_models():
        bundle = load_weight_bundle_file(entry.path)
        assert bundle.spec.input_dim == descriptors[entry.dataset_id].feature_dim
        assert bundle.dataset_id == entry.dataset_id
