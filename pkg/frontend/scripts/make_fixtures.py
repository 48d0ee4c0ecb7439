#!/usr/bin/env python3
"""Emit engine-side fixtures for the UI tests.

For each fixture prediction this records the trace document, the engine's
neighborhood-highlight payloads for every GNN layer and node, a handful of
provenance payloads, the prediction body, and the catalog. UI tests assert
their client-side derivations against these engine outputs.
"""

from __future__ import annotations

import json
from pathlib import Path

from gnnscope import (
    cell_provenance,
    list_models,
    load_dataset,
    load_model,
    neighborhood_highlight,
    resolve_bundle,
    select_inference_target,
    serialize_trace,
)

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CASES = [
    ("gcn_node_karate", "gcn", "node_classification", "karate", 5, 0),
    ("gat_node_karate", "gat", "node_classification", "karate", 0, 0),
    ("gat_link_karate", "gat", "link_prediction", "karate", (0, 33), 0),
    ("gcn_graph_mutag", "gcn", "graph_classification", "mutag", 0, 0),
    ("sage_node_twitch", "sage", "node_classification", "twitch", 3301, 11),
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "catalog.json").write_text(
        json.dumps([e.to_dict() for e in list_models()], indent=1))

    for name, variant, task, dataset_id, selector, seed in CASES:
        dataset = load_dataset(dataset_id)
        graph, target = select_inference_target(dataset, task, selector)
        model = load_model(resolve_bundle(variant, task, dataset_id))
        prediction, trace = model.predict(graph, target, rng_seed=seed)

        (OUT / f"trace_{name}.json").write_bytes(serialize_trace(trace))
        (OUT / f"prediction_{name}.json").write_text(
            json.dumps({"prediction": prediction.to_dict(),
                        "trace_id": prediction.trace_id}, indent=1))

        highlights: dict = {}
        for L, layer in enumerate(trace.layers):
            if layer.kind not in ("gcn", "gat", "sage"):
                continue
            highlights[str(L)] = {}
            for node in range(len(trace.graph_node_ids)):
                members, coeffs = neighborhood_highlight(trace, L, node)
                highlights[str(L)][str(node)] = {
                    "members": members, "coefficients": coeffs}
        (OUT / f"highlights_{name}.json").write_text(
            json.dumps(highlights, indent=1))

        samples = []
        for layer in trace.layers:
            for step in layer.steps:
                if step.symbol in ("agg", "activation", "alpha", "pool",
                                   "logits"):
                    samples.append((step.step_id, 0))
                    break
        payloads = []
        for step_id, cell in samples:
            prov = cell_provenance(trace, step_id, cell)
            payloads.append({
                "target": {"step_id": prov.target[0], "cell": prov.target[1]},
                "op_kind": prov.op_kind,
                "terms": [{"step_id": s, "cell": c, "coefficient": coeff}
                          for s, c, coeff in prov.terms],
            })
        (OUT / f"provenance_{name}.json").write_text(
            json.dumps(payloads, indent=1))
    print(f"wrote fixtures for {len(CASES)} cases to {OUT}")


if __name__ == "__main__":
    main()
