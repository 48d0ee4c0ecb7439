"""Generate the bundled dataset fixtures and load them back for training.

The generators write plain files first and every consumer here re-reads
those files, so the engine and the trainer see bit-identical data.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

TWITCH_NODES = 4200
TWITCH_FEATURE_DIM = 8
MUTAG_GRAPHS = 60


@dataclass
class LoadedGraph:
    features: np.ndarray  # float32 [n, d]
    edges: list[tuple[int, int]]
    node_labels: list[int] | None
    graph_label: int | None

    @property
    def n(self) -> int:
        return self.features.shape[0]


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def write_karate(root: Path) -> None:
    g = nx.karate_club_graph()
    out = root / "karate"
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "nodes.txt", "w") as f:
        for i in sorted(g.nodes):
            label = 0 if g.nodes[i]["club"] == "Mr. Hi" else 1
            f.write(f"{i} {label}\n")
    with open(out / "edges.txt", "w") as f:
        for u, v in sorted(tuple(sorted(e)) for e in g.edges):
            f.write(f"{u} {v}\n")
    (out / "meta.json").write_text(json.dumps(
        {"class_names": ["mr_hi", "officer"]}, indent=2) + "\n")


def _ring_with_tails(rng: np.random.Generator, ring_size: int,
                     extra: int) -> tuple[int, list[tuple[int, int]]]:
    edges = [(i, (i + 1) % ring_size) for i in range(ring_size)]
    n = ring_size
    for _ in range(extra):
        anchor = int(rng.integers(0, n))
        edges.append((anchor, n))
        n += 1
    return n, edges


def _random_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    return [(int(rng.integers(0, i)), i) for i in range(1, n)]


def write_mutag(root: Path, seed: int = 2024) -> None:
    """Synthetic chemical-compound collection: ring-bearing vs acyclic.

    Seven one-hot atom types; ring compounds lean on types 1/2 so both the
    structure and the composition carry the label signal.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    for gi in range(MUTAG_GRAPHS):
        label = gi % 2
        if label == 1:
            ring = int(rng.integers(5, 8))
            extra = int(rng.integers(0, 12))
            n, edges = _ring_with_tails(rng, ring, extra)
            atom_probs = [0.45, 0.2, 0.2, 0.05, 0.04, 0.03, 0.03]
        else:
            n = int(rng.integers(5, 20))
            edges = _random_tree(rng, n)
            atom_probs = [0.7, 0.05, 0.05, 0.05, 0.05, 0.05, 0.05]
        atoms = rng.choice(7, size=n, p=atom_probs)
        nodes = []
        for i in range(n):
            features = [0.0] * 7
            features[int(atoms[i])] = 1.0
            nodes.append({"id": f"g{gi}_{i}", "features": features})
        edge_ids = sorted({tuple(sorted((u, v))) for u, v in edges})
        graphs.append({
            "nodes": nodes,
            "edges": [[f"g{gi}_{u}", f"g{gi}_{v}"] for u, v in edge_ids],
            "graph_label": label,
        })
    out = root / "mutag"
    out.mkdir(parents=True, exist_ok=True)
    (out / "graphs.json").write_text(json.dumps(graphs) + "\n")
    (out / "meta.json").write_text(json.dumps(
        {"class_names": ["non_mutagenic", "mutagenic"]}, indent=2) + "\n")


def write_twitch(root: Path, seed: int = 4242) -> None:
    """Synthetic social-network component with locally clustered labels."""
    rng = np.random.default_rng(seed)
    g = nx.barabasi_albert_graph(TWITCH_NODES, 2, seed=seed)
    n = g.number_of_nodes()

    # plant labels, then smooth them over the graph so neighbors agree
    labels = rng.integers(0, 2, size=n)
    adjacency = [list(g.neighbors(i)) for i in range(n)]
    for _ in range(4):
        nxt = labels.copy()
        for i in range(n):
            votes = [labels[j] for j in adjacency[i]]
            if votes:
                ones = sum(votes)
                if ones * 2 > len(votes):
                    nxt[i] = 1
                elif ones * 2 < len(votes):
                    nxt[i] = 0
        labels = nxt

    centers = rng.normal(0.0, 1.0, size=(2, TWITCH_FEATURE_DIM))
    features = centers[labels] + rng.normal(0.0, 0.9,
                                            size=(n, TWITCH_FEATURE_DIM))

    out = root / "twitch"
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "nodes.txt", "w") as f:
        for i in range(n):
            feats = " ".join(f"{v:.6f}" for v in features[i])
            f.write(f"{i} {labels[i]} {feats}\n")
    with open(out / "edges.txt", "w") as f:
        for u, v in sorted(tuple(sorted(e)) for e in g.edges):
            f.write(f"{u} {v}\n")
    (out / "meta.json").write_text(json.dumps(
        {"class_names": ["regular", "mature"]}, indent=2) + "\n")


def write_manifest(root: Path) -> None:
    files = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            rel = path.relative_to(root).as_posix()
            files[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    (root / "manifest.json").write_text(
        json.dumps({"files": files}, indent=2, sort_keys=True) + "\n")


def write_dataset_readme(root: Path) -> None:
    (root / "README.md").write_text(README_TEXT)


README_TEXT = """\
# Bundled dataset fixtures

| id | kind | contents |
|---|---|---|
| karate | single graph | the classic 34-node karate-club social network; features are one-hot node identity (derived at load), labels are the two club factions |
| mutag | graph collection | 60 synthetic chemical-compound-like graphs (5-30 atoms, 7 one-hot atom types); binary labels follow ring structure and composition |
| twitch | single graph | a synthetic 4200-node power-law social component (preferential attachment) with 8 numeric features per account and binary labels, standing in for a large streaming-platform network |

karate is the exact Zachary network. mutag and twitch are desk-scale
synthetic stand-ins generated by the exporter (this repo ships no scraped
data); their statistics are chosen so every engine path (graph collections,
large-graph k-hop extraction, neighbor sampling) is exercised realistically.

Edges are undirected, deduplicated at generation time (and again at ingest),
and stored one per line as `u v`. `manifest.json` lists sha256 checksums for
every file. Formats: see docs/formats.md.
"""


# ---------------------------------------------------------------------------
# loading (file-backed, for training and golden emission)
# ---------------------------------------------------------------------------

def load_node_edge(root: Path, dataset_id: str,
                   one_hot_identity: bool = False) -> LoadedGraph:
    nodes_lines = (root / dataset_id / "nodes.txt").read_text().splitlines()
    labels = []
    rows = []
    for line in nodes_lines:
        parts = line.split()
        labels.append(int(parts[1]))
        if not one_hot_identity:
            rows.append([float(v) for v in parts[2:]])
    n = len(labels)
    features = (np.eye(n, dtype=np.float32) if one_hot_identity
                else np.asarray(rows, dtype=np.float32))
    edges = []
    for line in (root / dataset_id / "edges.txt").read_text().splitlines():
        u, v = line.split()
        edges.append((int(u), int(v)))
    return LoadedGraph(features=features, edges=edges,
                       node_labels=labels, graph_label=None)


def load_mutag(root: Path) -> list[LoadedGraph]:
    docs = json.loads((root / "mutag" / "graphs.json").read_text())
    graphs = []
    for doc in docs:
        index = {node["id"]: i for i, node in enumerate(doc["nodes"])}
        features = np.asarray([node["features"] for node in doc["nodes"]],
                              dtype=np.float32)
        edges = [(index[a], index[b]) for a, b in doc["edges"]]
        graphs.append(LoadedGraph(features=features, edges=edges,
                                  node_labels=None,
                                  graph_label=doc["graph_label"]))
    return graphs


def generate_all(root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    write_karate(root)
    write_mutag(root)
    write_twitch(root)
    write_dataset_readme(root)
    write_manifest(root)
