"""Desk-scale training loops for the 3-variant × 3-task zoo."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .datasets import LoadedGraph
from .models import GraphClassifier, LinkScorer, NodeClassifier

HIDDEN = 16
GRAPH_HEAD_HIDDEN = 8
CLASSES = 2
WEIGHT_DECAY = 5e-4


def train_node_classifier(variant: str, graph: LoadedGraph, seed: int,
                          epochs: int = 300, lr: float = 0.02,
                          train_fraction: float = 0.5,
                          weight_decay: float = WEIGHT_DECAY
                          ) -> tuple[NodeClassifier, float]:
    torch.manual_seed(seed)
    dims = [(graph.features.shape[1], HIDDEN), (HIDDEN, HIDDEN)]
    model = NodeClassifier(variant, dims, CLASSES)
    sparse = variant != "gat" and graph.n > 1000
    op = model.encoder.graph_operator(graph.n, graph.edges, sparse=sparse)
    x = torch.from_numpy(graph.features)
    y = torch.tensor(graph.node_labels, dtype=torch.long)

    rng = np.random.default_rng(seed)
    mask = torch.zeros(graph.n, dtype=torch.bool)
    mask[rng.choice(graph.n, max(4, int(train_fraction * graph.n)),
                    replace=False)] = True

    opt = torch.optim.Adam(model.parameters(), lr=lr,
                           weight_decay=weight_decay)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(epochs):
        opt.zero_grad()
        logits = model(x, op)
        loss = loss_fn(logits[mask], y[mask])
        loss.backward()
        opt.step()
    with torch.no_grad():
        accuracy = float((model(x, op).argmax(dim=1) == y).float().mean())
    return model, accuracy


def train_graph_classifier(variant: str, graphs: list[LoadedGraph], seed: int,
                           epochs: int = 120, lr: float = 0.01,
                           weight_decay: float = WEIGHT_DECAY
                           ) -> tuple[GraphClassifier, float]:
    torch.manual_seed(seed)
    dims = [(graphs[0].features.shape[1], HIDDEN), (HIDDEN, HIDDEN)]
    model = GraphClassifier(variant, dims, GRAPH_HEAD_HIDDEN, CLASSES)
    prepared = [
        (torch.from_numpy(g.features),
         model.encoder.graph_operator(g.n, g.edges),
         torch.tensor(g.graph_label, dtype=torch.long))
        for g in graphs
    ]
    opt = torch.optim.Adam(model.parameters(), lr=lr,
                           weight_decay=weight_decay)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(epochs):
        opt.zero_grad()
        loss = torch.stack([
            loss_fn(model(x, op)[None, :], y[None]) for x, op, y in prepared
        ]).mean()
        loss.backward()
        opt.step()
    with torch.no_grad():
        hits = sum(int(model(x, op).argmax() == y) for x, op, y in prepared)
    return model, hits / len(prepared)


def train_link_scorer(variant: str, graph: LoadedGraph, seed: int,
                      epochs: int = 250, lr: float = 0.01,
                      max_pos: int = 3000,
                      weight_decay: float = WEIGHT_DECAY
                      ) -> tuple[LinkScorer, float]:
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    dims = [(graph.features.shape[1], HIDDEN), (HIDDEN, HIDDEN)]
    model = LinkScorer(variant, dims)
    sparse = variant != "gat" and graph.n > 1000
    op = model.encoder.graph_operator(graph.n, graph.edges, sparse=sparse)
    x = torch.from_numpy(graph.features)

    pos = list(graph.edges)
    if len(pos) > max_pos:
        pos = [pos[i] for i in rng.choice(len(pos), max_pos, replace=False)]
    edge_set = {tuple(sorted(e)) for e in graph.edges}
    neg = []
    while len(neg) < len(pos):
        u, v = int(rng.integers(graph.n)), int(rng.integers(graph.n))
        if u != v and tuple(sorted((u, v))) not in edge_set:
            neg.append((u, v))
    pairs = torch.tensor(pos + neg, dtype=torch.long)
    targets = torch.tensor([1.0] * len(pos) + [0.0] * len(neg))

    opt = torch.optim.Adam(model.parameters(), lr=lr,
                           weight_decay=weight_decay)
    loss_fn = nn.BCEWithLogitsLoss()
    for _ in range(epochs):
        opt.zero_grad()
        loss = loss_fn(model(x, op, pairs), targets)
        loss.backward()
        opt.step()
    with torch.no_grad():
        scores = model(x, op, pairs)
        accuracy = float(((scores > 0) == (targets > 0.5)).float().mean())
    return model, accuracy
