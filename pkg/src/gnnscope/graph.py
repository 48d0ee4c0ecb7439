"""Undirected attributed graphs and the neighborhood arithmetic built on them.

Nodes are dense 0-based indices; stable external identifiers live in
``Graph.node_ids`` so subgraph extraction and UI linking survive relabeling.
Self-loops are never stored: degree and coefficient helpers add the self
edge at computation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateEdge,
    EmptySeeds,
    IndexOutOfRange,
    NotANeighbor,
    NotAPermutation,
    RaggedFeatures,
)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph with per-node feature vectors.

    Edges are stored as unordered pairs (u < v), without duplicates or
    self-loops. ``neighbors[i]`` is the sorted tuple N(i), precomputed at
    build time; all operations on a Graph are pure reads.
    """

    node_count: int
    features: np.ndarray  # float32 [node_count, feature_dim]
    edges: tuple[tuple[int, int], ...]
    node_labels: tuple[int, ...] | None
    graph_label: int | None
    node_ids: tuple[str, ...]
    neighbors: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def equals(self, other: "Graph") -> bool:
        """Structural equality (used by tests; numpy fields break ==)."""
        return (
            self.node_count == other.node_count
            and np.array_equal(self.features, other.features)
            and self.edges == other.edges
            and self.node_labels == other.node_labels
            and self.graph_label == other.graph_label
            and self.node_ids == other.node_ids
        )


@dataclass(frozen=True)
class NeighborhoodView:
    """N(i) ∪ {i} for one node, with one aggregation factor per member."""

    center: int
    members: tuple[int, ...]
    coefficients: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.center not in self.members:
            raise ValueError("center must be a member of its own neighborhood")
        if len(set(self.members)) != len(self.members):
            raise ValueError("duplicate members in neighborhood")
        if len(self.coefficients) != len(self.members):
            raise ValueError("coefficients must align with members")


def build_graph(
    feature_matrix,
    edge_list,
    node_labels=None,
    graph_label: int | None = None,
    node_ids: list[str] | None = None,
) -> Graph:
    """Validate inputs and construct a Graph.

    Raises IndexOutOfRange for endpoints outside [0, n), RaggedFeatures for
    non-rectangular feature rows, DuplicateEdge for repeated unordered pairs
    or explicit self-loops.
    """
    rows = [list(map(float, row)) for row in feature_matrix]
    if not rows:
        features = np.zeros((0, 1), dtype=np.float32)
    else:
        width = len(rows[0])
        if width < 1:
            raise RaggedFeatures("feature rows must have length >= 1")
        for r, row in enumerate(rows):
            if len(row) != width:
                raise RaggedFeatures(
                    f"feature row {r} has length {len(row)}, expected {width}"
                )
        features = np.asarray(rows, dtype=np.float32)
    n = features.shape[0]

    seen: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    for u, v in edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n) or not (0 <= v < n):
            raise IndexOutOfRange(f"edge ({u}, {v}) outside [0, {n})")
        if u == v:
            raise DuplicateEdge(f"self-loop ({u}, {u}) is not storable")
        pair = (u, v) if u < v else (v, u)
        if pair in seen:
            raise DuplicateEdge(f"edge {pair} appears more than once")
        seen.add(pair)
        edges.append(pair)
    edges.sort()

    adjacency: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adjacency[u].append(v)
        adjacency[v].append(u)

    if node_labels is not None:
        node_labels = tuple(int(x) for x in node_labels)
        if len(node_labels) != n:
            raise RaggedFeatures(f"{len(node_labels)} node labels for {n} nodes")
    if node_ids is None:
        ids = tuple(str(i) for i in range(n))
    else:
        ids = tuple(str(x) for x in node_ids)
        if len(ids) != n:
            raise RaggedFeatures(f"{len(ids)} node ids for {n} nodes")

    return Graph(
        node_count=n,
        features=features,
        edges=tuple(edges),
        node_labels=node_labels,
        graph_label=None if graph_label is None else int(graph_label),
        node_ids=ids,
        neighbors=tuple(tuple(sorted(adj)) for adj in adjacency),
    )


def _check_node(g: Graph, i: int) -> int:
    i = int(i)
    if not (0 <= i < g.node_count):
        raise IndexOutOfRange(f"node {i} outside [0, {g.node_count})")
    return i


def degree_with_self_loop(g: Graph, i: int) -> int:
    """|N(i)| + 1: the degree entering the symmetric normalization."""
    i = _check_node(g, i)
    return len(g.neighbors[i]) + 1


def gcn_coefficient(g: Graph, i: int, j: int) -> float:
    """1/sqrt(d_i * d_j) with self-loop degrees.

    Exactly symmetric in (i, j): the degrees multiply as integers before the
    single sqrt, so no ordering effect can creep in.
    """
    i, j = _check_node(g, i), _check_node(g, j)
    if j != i and j not in g.neighbors[i]:
        raise NotANeighbor(f"node {j} is not in N({i}) ∪ {{{i}}}")
    return 1.0 / math.sqrt(degree_with_self_loop(g, i) * degree_with_self_loop(g, j))


def neighborhood(g: Graph, i: int) -> NeighborhoodView:
    """Sorted N(i) ∪ {i} with the GCN coefficients as the default weighting."""
    i = _check_node(g, i)
    members = tuple(sorted(set(g.neighbors[i]) | {i}))
    coeffs = tuple(gcn_coefficient(g, i, j) for j in members)
    return NeighborhoodView(center=i, members=members, coefficients=coeffs)


def k_hop_subgraph(g: Graph, seeds, k: int) -> tuple[Graph, dict[int, int]]:
    """Induced subgraph of all nodes within k edges of any seed.

    Returns (subgraph, index_map old->new). New indices are the ranks of the
    kept old indices in ascending order; this ordering is part of the engine
    contract (sampling and trace layouts depend on it).
    """
    seeds = [_check_node(g, s) for s in seeds]
    if not seeds:
        raise EmptySeeds("at least one seed node is required")
    k = int(k)
    if k < 0:
        raise EmptySeeds("hop count must be >= 0")

    reached = set(seeds)
    frontier = set(seeds)
    for _ in range(k):
        nxt: set[int] = set()
        for u in frontier:
            nxt.update(g.neighbors[u])
        nxt -= reached
        if not nxt:
            break
        reached |= nxt
        frontier = nxt

    kept = sorted(reached)
    index_map = {old: new for new, old in enumerate(kept)}
    sub_edges = [
        (index_map[u], index_map[v])
        for u, v in g.edges
        if u in index_map and v in index_map
    ]
    labels = None
    if g.node_labels is not None:
        labels = [g.node_labels[old] for old in kept]
    sub = build_graph(
        g.features[kept].tolist(),
        sub_edges,
        node_labels=labels,
        graph_label=g.graph_label,
        node_ids=[g.node_ids[old] for old in kept],
    )
    return sub, index_map


def permute_graph(g: Graph, perm) -> Graph:
    """Relabel nodes by a permutation: old node v becomes perm[v]."""
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(g.node_count)):
        raise NotAPermutation(f"not a bijection on [0, {g.node_count})")

    inverse = [0] * g.node_count
    for old, new in enumerate(perm):
        inverse[new] = old

    features = g.features[inverse].tolist()
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    labels = None
    if g.node_labels is not None:
        labels = [g.node_labels[old] for old in inverse]
    return build_graph(
        features,
        edges,
        node_labels=labels,
        graph_label=g.graph_label,
        node_ids=[g.node_ids[old] for old in inverse],
    )
