"""Bundled dataset fixtures and user-graph JSON ingestion.

Three fixtures ship with the engine: a chemical-compound graph collection
(``mutag``), the karate-club social network (``karate``), and a larger
social-network component (``twitch``). Karate and twitch are plain-text
node/edge files; mutag is a JSON collection in the same document shape as
uploaded graphs. A manifest file lists sha256 checksums for every fixture.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import paths
from .errors import (
    CorruptDataFile,
    InvalidSelector,
    ParseError,
    SchemaError,
    UnknownDataset,
)
from .graph import Graph, build_graph

log = logging.getLogger(__name__)

DATASET_IDS = ("karate", "mutag", "twitch")

_KNOWN_GRAPH_FIELDS = {"nodes", "edges", "graph_label"}
_KNOWN_NODE_FIELDS = {"id", "features", "label"}


@dataclass(frozen=True)
class DatasetDescriptor:
    id: str
    kind: str  # graph_collection | single_graph
    graph_count: int
    feature_dim: int
    class_names: tuple[str, ...]


# ---------------------------------------------------------------------------
# graph JSON ingestion (upload format)
# ---------------------------------------------------------------------------

def parse_graph_json(data: bytes | str, strict: bool = False) -> Graph:
    """Build a Graph from the documented upload JSON.

    Directed duplicates are symmetrized and explicit self-loops dropped
    (each with a warning record); unknown fields are ignored unless
    ``strict`` turns them into SchemaError.
    """
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"graph document is not valid JSON: {exc}") from exc
    return graph_from_document(doc, strict=strict)


def graph_from_document(doc, strict: bool = False, where: str = "") -> Graph:
    def loc(field: str) -> str:
        return f"{where}{field}" if where else field

    if not isinstance(doc, dict):
        raise SchemaError(loc("$") + ": expected a JSON object")
    if strict:
        for field in doc:
            if field not in _KNOWN_GRAPH_FIELDS:
                raise SchemaError(loc(field) + ": unknown field")
    nodes = doc.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise SchemaError(loc("nodes"))
    edges_doc = doc.get("edges")
    if edges_doc is None:
        edges_doc = []
    if not isinstance(edges_doc, list):
        raise SchemaError(loc("edges"))

    ids: list[str] = []
    features: list[list[float]] = []
    labels: list[int | None] = []
    index_of: dict[str, int] = {}
    for n, node in enumerate(nodes):
        if not isinstance(node, dict):
            raise SchemaError(loc(f"nodes[{n}]"))
        if strict:
            for field in node:
                if field not in _KNOWN_NODE_FIELDS:
                    raise SchemaError(loc(f"nodes[{n}].{field}") + ": unknown field")
        if "id" not in node:
            raise SchemaError(loc(f"nodes[{n}].id"))
        node_id = str(node["id"])
        if node_id in index_of:
            raise SchemaError(loc(f"nodes[{n}].id") + f": duplicate id {node_id!r}")
        feats = node.get("features")
        if not isinstance(feats, list) or not feats:
            raise SchemaError(loc(f"nodes[{n}].features"))
        try:
            row = [float(v) for v in feats]
        except (TypeError, ValueError):
            raise SchemaError(loc(f"nodes[{n}].features"))
        index_of[node_id] = n
        ids.append(node_id)
        features.append(row)
        labels.append(int(node["label"]) if "label" in node else None)

    have_labels = [x for x in labels if x is not None]
    if have_labels and len(have_labels) != len(labels):
        missing = labels.index(None)
        raise SchemaError(loc(f"nodes[{missing}].label") + ": missing on some nodes")
    node_labels = labels if have_labels else None

    seen: set[tuple[int, int]] = set()
    edge_list: list[tuple[int, int]] = []
    dropped_loops = 0
    merged = 0
    for e, edge in enumerate(edges_doc):
        if (not isinstance(edge, list)) or len(edge) != 2:
            raise SchemaError(loc(f"edges[{e}]"))
        a, b = str(edge[0]), str(edge[1])
        if a not in index_of or b not in index_of:
            raise SchemaError(loc(f"edges[{e}]") + f": unknown node id")
        u, v = index_of[a], index_of[b]
        if u == v:
            dropped_loops += 1
            continue
        pair = (u, v) if u < v else (v, u)
        if pair in seen:
            merged += 1
            continue
        seen.add(pair)
        edge_list.append(pair)
    if dropped_loops:
        log.warning("dropped %d explicit self-loop(s) at ingest", dropped_loops)
    if merged:
        log.warning("merged %d duplicate/reverse edge(s) at ingest", merged)

    graph_label = doc.get("graph_label")
    if graph_label is not None and not isinstance(graph_label, int):
        raise SchemaError(loc("graph_label"))
    return build_graph(features, edge_list, node_labels=node_labels,
                       graph_label=graph_label, node_ids=ids)


def graph_to_document(g: Graph) -> dict:
    doc: dict = {
        "nodes": [
            {"id": g.node_ids[i], "features": [float(v) for v in g.features[i]]}
            for i in range(g.node_count)
        ],
        "edges": [[g.node_ids[u], g.node_ids[v]] for u, v in g.edges],
    }
    if g.node_labels is not None:
        for i, node in enumerate(doc["nodes"]):
            node["label"] = g.node_labels[i]
    if g.graph_label is not None:
        doc["graph_label"] = g.graph_label
    return doc


def graph_to_json(g: Graph) -> bytes:
    """Serialize in the upload format; parse_graph_json round-trips it."""
    return json.dumps(graph_to_document(g), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# fixture loading
# ---------------------------------------------------------------------------

def _read_lines(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorruptDataFile(f"{path}: {exc}") from exc
    return [ln for ln in text.splitlines() if ln.strip()]


def _load_meta(root: Path, dataset_id: str) -> dict:
    path = root / dataset_id / "meta.json"
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptDataFile(f"{path}: {exc}") from exc


def _load_node_edge_dataset(root: Path, dataset_id: str,
                            with_features: bool) -> Graph:
    nodes_path = root / dataset_id / "nodes.txt"
    edges_path = root / dataset_id / "edges.txt"
    ids: list[str] = []
    labels: list[int] = []
    rows: list[list[float]] = []
    index_of: dict[str, int] = {}
    for lineno, line in enumerate(_read_lines(nodes_path), start=1):
        parts = line.split()
        expected = "id label features..." if with_features else "id label"
        if len(parts) < (3 if with_features else 2):
            raise CorruptDataFile(
                f"{nodes_path}:{lineno}: expected '{expected}'"
            )
        try:
            labels.append(int(parts[1]))
            if with_features:
                rows.append([float(v) for v in parts[2:]])
        except ValueError as exc:
            raise CorruptDataFile(f"{nodes_path}:{lineno}: {exc}") from exc
        index_of[parts[0]] = len(ids)
        ids.append(parts[0])

    if not with_features:
        rows = np.eye(len(ids), dtype=np.float32).tolist()

    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(_read_lines(edges_path), start=1):
        parts = line.split()
        if len(parts) != 2:
            raise CorruptDataFile(f"{edges_path}:{lineno}: expected 'u v'")
        try:
            edges.append((index_of[parts[0]], index_of[parts[1]]))
        except KeyError as exc:
            raise CorruptDataFile(
                f"{edges_path}:{lineno}: unknown node id {exc}"
            ) from exc
    return build_graph(rows, edges, node_labels=labels, node_ids=ids)


def _load_graph_collection(root: Path, dataset_id: str) -> list[Graph]:
    path = root / dataset_id / "graphs.json"
    try:
        docs = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptDataFile(f"{path}: {exc}") from exc
    if not isinstance(docs, list) or not docs:
        raise CorruptDataFile(f"{path}: expected a non-empty JSON array")
    graphs = []
    for gi, doc in enumerate(docs):
        try:
            graph = graph_from_document(doc, where=f"[{gi}].")
        except SchemaError as exc:
            raise CorruptDataFile(f"{path}: graph {gi}: {exc}") from exc
        if graph.graph_label is None:
            raise CorruptDataFile(f"{path}: graph {gi} has no graph_label")
        graphs.append(graph)
    return graphs


def load_dataset(dataset_id: str,
                 data_dir: str | Path | None = None
                 ) -> tuple[DatasetDescriptor, list[Graph]]:
    """Load one bundled dataset; graphs satisfy all Graph invariants."""
    if dataset_id not in DATASET_IDS:
        raise UnknownDataset(f"unknown dataset {dataset_id!r}; "
                             f"known: {', '.join(DATASET_IDS)}")
    root = Path(data_dir) if data_dir else paths.dataset_dir()
    meta = _load_meta(root, dataset_id)
    if dataset_id == "mutag":
        graphs = _load_graph_collection(root, dataset_id)
        kind = "graph_collection"
    else:
        features = dataset_id == "twitch"  # karate features are one-hot identity
        graphs = [_load_node_edge_dataset(root, dataset_id, with_features=features)]
        kind = "single_graph"

    dims = {g.feature_dim for g in graphs}
    if len(dims) != 1:
        raise CorruptDataFile(f"{dataset_id}: inconsistent feature dims {dims}")
    descriptor = DatasetDescriptor(
        id=dataset_id,
        kind=kind,
        graph_count=len(graphs),
        feature_dim=dims.pop(),
        class_names=tuple(meta["class_names"]),
    )
    return descriptor, graphs


def select_inference_target(dataset: tuple[DatasetDescriptor, list[Graph]],
                            task: str, selector) -> tuple[Graph, object]:
    """Resolve a user selector into (graph, predict target) for a task."""
    descriptor, graphs = dataset
    if descriptor.kind == "graph_collection":
        if task != "graph_classification":
            raise InvalidSelector(
                f"{descriptor.id} is a graph collection; only graph "
                f"classification is selectable"
            )
        try:
            index = int(selector)
        except (TypeError, ValueError):
            raise InvalidSelector(f"graph index expected, got {selector!r}")
        if not (0 <= index < len(graphs)):
            raise InvalidSelector(
                f"graph index {index} outside [0, {len(graphs)})"
            )
        return graphs[index], "graph"

    graph = graphs[0]
    if task == "graph_classification":
        raise InvalidSelector(
            f"{descriptor.id} is a single graph; pick a node or edge task"
        )
    if task == "node_classification":
        try:
            node = int(selector)
        except (TypeError, ValueError):
            raise InvalidSelector(f"node index expected, got {selector!r}")
        if not (0 <= node < graph.node_count):
            raise InvalidSelector(
                f"node {node} outside [0, {graph.node_count})"
            )
        return graph, node
    try:
        a, b = (int(x) for x in selector)
    except (TypeError, ValueError):
        raise InvalidSelector(f"node pair expected, got {selector!r}")
    for x in (a, b):
        if not (0 <= x < graph.node_count):
            raise InvalidSelector(f"node {x} outside [0, {graph.node_count})")
    return graph, (a, b)


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

def verify_manifest(data_dir: str | Path | None = None) -> dict[str, bool]:
    """Check every fixture file against the shipped sha256 manifest."""
    root = Path(data_dir) if data_dir else paths.dataset_dir()
    manifest_path = root / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptDataFile(f"{manifest_path}: {exc}") from exc
    results: dict[str, bool] = {}
    for rel, expected in manifest["files"].items():
        digest = hashlib.sha256((root / rel).read_bytes()).hexdigest()
        results[rel] = digest == expected
    return results
