"""Bundle serialization and golden-case emission.

Golden logits are computed at float64 from the torch modules, on exactly
the graph the engine will see: for large single-graph datasets that means
this module's own breadth-first 2-hop extraction (kept nodes reindexed by
ascending original index) and, for SAGE, neighbor samples drawn with the
documented numpy derivation. Nothing here imports the engine.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path

import numpy as np
import torch

from .datasets import LoadedGraph
from .models import (
    GraphClassifier,
    LinkScorer,
    NodeClassifier,
    adjacency_mask,
    normalized_adjacency,
)

SUBGRAPH_THRESHOLD = 500
SAMPLE_SIZE = 25
GNN_LAYER_COUNT = 2


# ---------------------------------------------------------------------------
# weight bundles
# ---------------------------------------------------------------------------

def _tensor_entries(variant: str, model) -> list[tuple[str, np.ndarray]]:
    entries: list[tuple[str, np.ndarray]] = []
    for idx, conv in enumerate(model.encoder.convs):
        prefix = f"gnn.{idx}"
        if variant == "gcn":
            entries.append((f"{prefix}.W", conv.lin.weight.detach().numpy()))
            entries.append((f"{prefix}.b", conv.bias.detach().numpy()))
        elif variant == "gat":
            entries.append((f"{prefix}.W", conv.lin.weight.detach().numpy()))
            entries.append((f"{prefix}.a", conv.att.detach().numpy()))
        else:
            entries.append((f"{prefix}.W_self",
                            conv.lin_self.weight.detach().numpy()))
            entries.append((f"{prefix}.W_neigh",
                            conv.lin_neigh.weight.detach().numpy()))
            entries.append((f"{prefix}.b", conv.lin_self.bias.detach().numpy()))
    if isinstance(model, NodeClassifier):
        entries.append(("head.0.W", model.head.weight.detach().numpy()))
        entries.append(("head.0.b", model.head.bias.detach().numpy()))
    elif isinstance(model, GraphClassifier):
        linears = [m for m in model.head if isinstance(m, torch.nn.Linear)]
        for t, lin in enumerate(linears):
            entries.append((f"head.{t}.W", lin.weight.detach().numpy()))
            entries.append((f"head.{t}.b", lin.bias.detach().numpy()))
    return entries


def export_bundle(model, variant: str, task: str, dataset_id: str,
                  gnn_dims, metadata: dict[str, str], path: Path) -> int:
    """Write one deterministic bundle document; returns its tensor count."""
    head = {"node_classification": "per_node_mlp",
            "graph_classification": "pool_then_mlp",
            "link_prediction": "dot_product"}[task]
    entries = _tensor_entries(variant, model)
    doc = {
        "format_version": 1,
        "spec": {
            "variant": variant,
            "task": task,
            "gnn_layers": [list(d) for d in gnn_dims],
            "head": head,
        },
        "dataset_id": dataset_id,
        "parameters": [
            {
                "name": name,
                "shape": list(values.shape),
                "values": [float(np.float32(v)) for v in np.ravel(values)],
            }
            for name, values in entries
        ],
        "training_metadata": metadata,
    }
    path.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")))
    return len(entries)


# ---------------------------------------------------------------------------
# extraction and sampling (documented contracts, engine-independent)
# ---------------------------------------------------------------------------

def bfs_khop(edges, seeds, k: int) -> list[int]:
    adjacency: dict[int, set[int]] = {}
    for u, v in edges:
        adjacency.setdefault(u, set()).add(v)
        adjacency.setdefault(v, set()).add(u)
    dist = {s: 0 for s in seeds}
    queue = deque(seeds)
    while queue:
        u = queue.popleft()
        if dist[u] == k:
            continue
        for w in adjacency.get(u, ()):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return sorted(dist)


def extract_working_graph(graph: LoadedGraph, seeds,
                          k: int = GNN_LAYER_COUNT):
    """(working graph, kept original indices, old->local map)."""
    if graph.n <= SUBGRAPH_THRESHOLD:
        return graph, list(range(graph.n)), {i: i for i in range(graph.n)}
    kept = bfs_khop(graph.edges, list(seeds), k)
    local = {old: new for new, old in enumerate(kept)}
    sub_edges = [(local[u], local[v]) for u, v in graph.edges
                 if u in local and v in local]
    sub = LoadedGraph(features=graph.features[kept],
                      edges=sub_edges,
                      node_labels=None, graph_label=None)
    return sub, kept, local


def documented_sample(neighbors_sorted: list[int], size: int,
                      layer_seed: int, node_local: int) -> list[int]:
    if len(neighbors_sorted) <= size:
        return list(neighbors_sorted)
    rng = np.random.default_rng([layer_seed, node_local])
    picked = rng.choice(np.asarray(neighbors_sorted, dtype=np.int64),
                        size=size, replace=False)
    return sorted(int(x) for x in picked)


def sample_plan(graph: LoadedGraph, base_seed: int,
                layer_count: int = GNN_LAYER_COUNT
                ) -> dict[int, dict[int, list[int]]]:
    """Per-layer, per-node sample lists for one working graph."""
    adjacency: dict[int, set[int]] = {i: set() for i in range(graph.n)}
    for u, v in graph.edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    plan: dict[int, dict[int, list[int]]] = {}
    for layer in range(layer_count):
        layer_seed = base_seed + layer
        plan[layer] = {
            i: documented_sample(sorted(adjacency[i]), SAMPLE_SIZE,
                                 layer_seed, i)
            for i in range(graph.n)
        }
    return plan


# ---------------------------------------------------------------------------
# float64 reference forward passes
# ---------------------------------------------------------------------------

def _sampled_mean_ops(graph: LoadedGraph, plan) -> list[torch.Tensor]:
    ops = []
    for layer in sorted(plan):
        M = torch.zeros((graph.n, graph.n), dtype=torch.float64)
        for i, sampled in plan[layer].items():
            if sampled:
                share = 1.0 / len(sampled)
                for j in sampled:
                    M[i, j] = share
        ops.append(M)
    return ops


def reference_embeddings(model, variant: str, graph: LoadedGraph,
                         plan=None) -> torch.Tensor:
    """Double-precision node embeddings after the GNN stack."""
    ref = model.double()
    x = torch.from_numpy(graph.features).double()
    if variant == "sage":
        ops = _sampled_mean_ops(graph, plan)
        for conv, op in zip(ref.encoder.convs, ops):
            x = torch.relu(conv.lin_self(x) + conv.lin_neigh(op @ x))
        return x
    if variant == "gcn":
        op = normalized_adjacency(graph.n, graph.edges, dtype=torch.float64)
    else:
        op = adjacency_mask(graph.n, graph.edges)
    return ref.encoder(x, op)


def reference_logits(model, variant: str, task: str, graph: LoadedGraph,
                     local_target, plan=None
                     ) -> tuple[list[float], float | None, float]:
    with torch.no_grad():
        emb = reference_embeddings(model, variant, graph, plan)
        hidden_peak = float(emb.abs().max())
        if task == "node_classification":
            logits = model.head(emb)[local_target]
            return [float(v) for v in logits], None, hidden_peak
        if task == "graph_classification":
            logits = model.head(emb.mean(dim=0))
            return [float(v) for v in logits], None, hidden_peak
        a, b = local_target
        raw = float((emb[a] * emb[b]).sum())
        probability = 1.0 / (1.0 + float(np.exp(-raw)))
        return [raw, 0.0], probability, hidden_peak


# ---------------------------------------------------------------------------
# golden cases
# ---------------------------------------------------------------------------

def emit_golden_cases(model, variant: str, task: str, dataset_id: str,
                      bundle_name: str, data, selectors, seed: int,
                      path: Path) -> int:
    """Run the reference forward for each selector; write the golden file."""
    cases = []
    peaks: list[float] = []
    for selector in selectors:
        if task == "graph_classification":
            graph: LoadedGraph = data[selector]
            work, target_local = graph, "graph"
        else:
            graph = data
            seeds = [selector] if task == "node_classification" else list(selector)
            work, _, local = extract_working_graph(graph, seeds)
            if task == "node_classification":
                target_local = local[selector]
            else:
                target_local = (local[selector[0]], local[selector[1]])

        plan = sample_plan(work, seed) if variant == "sage" else None
        logits, probability, hidden_peak = reference_logits(
            model, variant, task, work, target_local, plan)
        peaks.append(hidden_peak)
        if task != "link_prediction":
            peaks.append(max(abs(v) for v in logits))
        case = {
            "selector": list(selector) if isinstance(selector, tuple) else selector,
            "seed": seed,
            "reference_logits": logits,
        }
        if probability is not None:
            case["probability"] = probability
        if task != "graph_classification" and graph.n > SUBGRAPH_THRESHOLD:
            case["subgraph_size"] = work.n
        if plan is not None:
            case["sample_lists"] = {
                str(layer): {str(i): nodes for i, nodes in plan[layer].items()}
                for layer in sorted(plan)
            }
        cases.append(case)

    doc = {
        "bundle": bundle_name,
        "variant": variant,
        "task": task,
        "dataset": dataset_id,
        "cases": cases,
    }
    path.write_text(json.dumps(doc, sort_keys=True, indent=1))
    # float32-stored trace cells recompute within 1e-6 only below ~16
    worst = max(peaks)
    if worst > 15.0:
        raise RuntimeError(
            f"{bundle_name}: trace-visible values reach {worst:.2f}; retrain "
            f"with stronger regularization to keep provenance recomputation "
            f"inside its tolerance"
        )
    return len(cases)
