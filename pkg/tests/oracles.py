"""Independent reference implementations used to cross-check the engine.

Everything here is deliberately written against raw (n, edges, arrays)
inputs with its own arithmetic (dense matrices or scalar loops), not
against the engine's per-node kernels, so the two routes stay independent.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np


def dense_gcn_oracle(n: int, edges, X, W, b) -> np.ndarray:
    """relu(D^-1/2 (A+I) D^-1/2 X W^T + 1 b^T) with dense float64 matrices."""
    A = np.zeros((n, n), dtype=np.float64)
    for u, v in edges:
        A[u, v] = 1.0
        A[v, u] = 1.0
    A_hat = A + np.eye(n)
    d = A_hat.sum(axis=1)
    D_inv_sqrt = np.diag(1.0 / np.sqrt(d))
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = D_inv_sqrt @ A_hat @ D_inv_sqrt @ X @ W.T + b[None, :]
    return np.maximum(out, 0.0)


def gat_oracle(n: int, edges, X, W, a, slope: float) -> np.ndarray:
    """Scalar-loop single-head attention with float64 accumulation."""
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    out_dim = W.shape[0]

    adjacency = {i: {i} for i in range(n)}
    for u, v in edges:
        adjacency[u].add(v)
        adjacency[v].add(u)

    wx = np.zeros((n, out_dim))
    for i in range(n):
        for d in range(out_dim):
            wx[i, d] = sum(W[d, k] * X[i, k] for k in range(X.shape[1]))

    out = np.zeros((n, out_dim))
    for i in range(n):
        members = sorted(adjacency[i])
        scores = []
        for j in members:
            s = sum(a[d] * wx[i, d] for d in range(out_dim))
            s += sum(a[out_dim + d] * wx[j, d] for d in range(out_dim))
            scores.append(s if s >= 0 else slope * s)
        m = max(scores)
        exps = [math.exp(s - m) for s in scores]
        total = sum(exps)
        alphas = [e / total for e in exps]
        for d in range(out_dim):
            acc = sum(alphas[m_] * wx[j, d] for m_, j in enumerate(members))
            out[i, d] = max(0.0, acc)
    return out


def gat_alpha_oracle(n: int, edges, X, W, a, slope: float) -> dict[int, list[float]]:
    """Per-node attention coefficients over sorted N(i) ∪ {i}."""
    X = np.asarray(X, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    out_dim = W.shape[0]
    adjacency = {i: {i} for i in range(n)}
    for u, v in edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    wx = X @ W.T
    alphas: dict[int, list[float]] = {}
    for i in range(n):
        members = sorted(adjacency[i])
        scores = []
        for j in members:
            s = float(a[:out_dim] @ wx[i] + a[out_dim:] @ wx[j])
            scores.append(s if s >= 0 else slope * s)
        m = max(scores)
        exps = [math.exp(s - m) for s in scores]
        total = sum(exps)
        alphas[i] = [e / total for e in exps]
    return alphas


def sage_oracle(n: int, X, W_self, W_neigh, b, sample_lists) -> np.ndarray:
    """Scalar-loop SAGE given externally fixed per-node sample lists."""
    X = np.asarray(X, dtype=np.float64)
    W_self = np.asarray(W_self, dtype=np.float64)
    W_neigh = np.asarray(W_neigh, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out_dim = W_self.shape[0]
    out = np.zeros((n, out_dim))
    for i in range(n):
        sampled = sample_lists[i]
        if sampled:
            mean = [
                sum(X[j, k] for j in sampled) / len(sampled)
                for k in range(X.shape[1])
            ]
        else:
            mean = [0.0] * X.shape[1]
        for d in range(out_dim):
            acc = sum(W_self[d, k] * X[i, k] for k in range(X.shape[1]))
            acc += sum(W_neigh[d, k] * mean[k] for k in range(X.shape[1]))
            acc += b[d]
            out[i, d] = max(0.0, acc)
    return out


def mlp_oracle(x, layer_params) -> np.ndarray:
    """Scalar-loop MLP: affine + relu chain, final layer affine only."""
    row = [float(v) for v in x]
    for t, (W, b) in enumerate(layer_params):
        W = np.asarray(W, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        nxt = []
        for d in range(W.shape[0]):
            acc = sum(W[d, k] * row[k] for k in range(W.shape[1])) + b[d]
            if t < len(layer_params) - 1:
                acc = max(0.0, acc)
            nxt.append(acc)
        row = nxt
    return np.asarray(row)


def column_mean_oracle(X) -> list[float]:
    X = [list(map(float, row)) for row in X]
    n, dim = len(X), len(X[0])
    return [sum(row[d] for row in X) / n for d in range(dim)]


def bfs_nodes(edges, seeds, k: int) -> set[int]:
    """Breadth-first ≤ k-hop node set straight off an edge list."""
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
    return set(dist)


def recompute_cell(op_kind: str, sources: list[float], coefficients: list[float],
                   slope: float | None = None) -> float:
    """Recompute one provenance target from its terms, per the op semantics."""
    if op_kind in ("weighted_sum", "matmul_cell", "add", "mean_cell", "dot_cell"):
        return math.fsum(c * s for c, s in zip(coefficients, sources))
    if op_kind == "max_zero":
        (s,) = sources
        return max(0.0, s)
    if op_kind == "leaky":
        (s,) = sources
        return s if s >= 0 else slope * s
    if op_kind == "softmax_cell":
        m = max(sources)
        exps = [math.exp(s - m) for s in sources]
        return exps[0] / math.fsum(exps)
    raise AssertionError(f"unknown op kind {op_kind}")


def random_graph(rng: np.random.Generator, max_nodes: int = 20,
                 max_dim: int = 8, min_nodes: int = 2):
    """Seeded random undirected graph as (n, edges, features array)."""
    n = int(rng.integers(min_nodes, max_nodes + 1))
    dim = int(rng.integers(1, max_dim + 1))
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.35:
                edges.append((u, v))
    X = rng.normal(size=(n, dim)).astype(np.float32)
    return n, edges, X
