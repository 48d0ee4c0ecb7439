"""Torch modules mirroring the documented layer math, for training.

Forward conventions match docs/formats.md exactly: symmetric normalization
with self-loops for GCN, single-head additive attention (leaky slope 0.2,
no bias) for GAT, and mean aggregation with separate self/neighbor
transforms for SAGE. Training aggregates over full neighborhoods; sampled
inference for golden cases lives in export.py.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


def normalized_adjacency(n: int, edges, dtype=torch.float32) -> torch.Tensor:
    """Dense D^-1/2 (A+I) D^-1/2."""
    A = torch.zeros((n, n), dtype=dtype)
    for u, v in edges:
        A[u, v] = 1.0
        A[v, u] = 1.0
    A += torch.eye(n, dtype=dtype)
    d_inv_sqrt = A.sum(dim=1).rsqrt()
    return d_inv_sqrt[:, None] * A * d_inv_sqrt[None, :]


def sparse_normalized_adjacency(n: int, edges) -> torch.Tensor:
    deg = np.ones(n)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    inv = 1.0 / np.sqrt(deg)
    rows, cols, vals = [], [], []
    for u, v in edges:
        rows += [u, v]
        cols += [v, u]
        vals += [inv[u] * inv[v], inv[u] * inv[v]]
    for i in range(n):
        rows.append(i)
        cols.append(i)
        vals.append(inv[i] * inv[i])
    idx = torch.tensor([rows, cols], dtype=torch.long)
    return torch.sparse_coo_tensor(idx, torch.tensor(vals, dtype=torch.float32),
                                   (n, n)).coalesce()


def sparse_mean_adjacency(n: int, edges) -> torch.Tensor:
    """Row-stochastic neighbor averaging (no self), zero rows for isolates."""
    deg = np.zeros(n)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    rows, cols, vals = [], [], []
    for u, v in edges:
        rows += [u, v]
        cols += [v, u]
        vals += [1.0 / deg[u], 1.0 / deg[v]]
    idx = torch.tensor([rows, cols], dtype=torch.long)
    return torch.sparse_coo_tensor(idx, torch.tensor(vals, dtype=torch.float32),
                                   (n, n)).coalesce()


def adjacency_mask(n: int, edges) -> torch.Tensor:
    mask = torch.eye(n, dtype=torch.bool)
    for u, v in edges:
        mask[u, v] = True
        mask[v, u] = True
    return mask


class GCNConv(nn.Module):
    def __init__(self, in_dim: int, out_dim: int) -> None:
        super().__init__()
        # bias sits outside the aggregation: W (sum coeff x_j) + b
        self.lin = nn.Linear(in_dim, out_dim, bias=False)
        self.bias = nn.Parameter(torch.zeros(out_dim))

    def forward(self, x: torch.Tensor, adj_norm: torch.Tensor) -> torch.Tensor:
        if adj_norm.is_sparse:
            return torch.sparse.mm(adj_norm, self.lin(x)) + self.bias
        return adj_norm @ self.lin(x) + self.bias


class GATConv(nn.Module):
    def __init__(self, in_dim: int, out_dim: int, slope: float = 0.2) -> None:
        super().__init__()
        self.lin = nn.Linear(in_dim, out_dim, bias=False)
        self.att = nn.Parameter(torch.empty(2 * out_dim))
        nn.init.normal_(self.att, std=0.5)
        self.out_dim = out_dim
        self.slope = slope

    def forward(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        wx = self.lin(x)
        s = wx @ self.att[: self.out_dim]   # aggregating-node half
        t = wx @ self.att[self.out_dim:]    # neighbor half
        e = s[:, None] + t[None, :]
        e = torch.nn.functional.leaky_relu(e, self.slope)
        e = e.masked_fill(~mask, float("-inf"))
        alpha = torch.softmax(e, dim=1)
        return alpha @ wx


class SAGEConv(nn.Module):
    def __init__(self, in_dim: int, out_dim: int) -> None:
        super().__init__()
        self.lin_self = nn.Linear(in_dim, out_dim, bias=True)
        self.lin_neigh = nn.Linear(in_dim, out_dim, bias=False)

    def forward(self, x: torch.Tensor, mean_adj: torch.Tensor) -> torch.Tensor:
        if mean_adj.is_sparse:
            neigh = torch.sparse.mm(mean_adj, x)
        else:
            neigh = mean_adj @ x
        return self.lin_self(x) + self.lin_neigh(neigh)


class GnnEncoder(nn.Module):
    """Stack of two GNN layers with rectifiers, any variant."""

    def __init__(self, variant: str, dims: list[tuple[int, int]]) -> None:
        super().__init__()
        conv = {"gcn": GCNConv, "gat": GATConv, "sage": SAGEConv}[variant]
        self.variant = variant
        self.convs = nn.ModuleList([conv(i, o) for i, o in dims])

    def forward(self, x: torch.Tensor, op: torch.Tensor) -> torch.Tensor:
        for conv in self.convs:
            x = torch.relu(conv(x, op))
        return x

    def graph_operator(self, n: int, edges, sparse: bool = False) -> torch.Tensor:
        if self.variant == "gcn":
            return sparse_normalized_adjacency(n, edges) if sparse \
                else normalized_adjacency(n, edges)
        if self.variant == "gat":
            return adjacency_mask(n, edges)
        return sparse_mean_adjacency(n, edges) if sparse \
            else _dense_mean_adjacency(n, edges)


def _dense_mean_adjacency(n: int, edges) -> torch.Tensor:
    A = torch.zeros((n, n))
    for u, v in edges:
        A[u, v] = 1.0
        A[v, u] = 1.0
    deg = A.sum(dim=1, keepdim=True).clamp(min=1.0)
    return A / deg


class NodeClassifier(nn.Module):
    def __init__(self, variant: str, dims, classes: int) -> None:
        super().__init__()
        self.encoder = GnnEncoder(variant, dims)
        self.head = nn.Linear(dims[-1][1], classes)

    def forward(self, x, op):
        return self.head(self.encoder(x, op))


class GraphClassifier(nn.Module):
    def __init__(self, variant: str, dims, hidden: int, classes: int) -> None:
        super().__init__()
        self.encoder = GnnEncoder(variant, dims)
        self.head = nn.Sequential(
            nn.Linear(dims[-1][1], hidden), nn.ReLU(),
            nn.Linear(hidden, classes),
        )

    def forward(self, x, op):
        pooled = self.encoder(x, op).mean(dim=0)
        return self.head(pooled)


class LinkScorer(nn.Module):
    def __init__(self, variant: str, dims) -> None:
        super().__init__()
        self.encoder = GnnEncoder(variant, dims)

    def forward(self, x, op, pairs: torch.Tensor) -> torch.Tensor:
        z = self.encoder(x, op)
        return (z[pairs[:, 0]] * z[pairs[:, 1]]).sum(dim=1)
