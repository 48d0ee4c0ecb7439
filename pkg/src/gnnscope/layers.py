"""Forward kernels for GCN, GAT, and GraphSAGE layers plus the task heads.

Every kernel is a pure function of (graph, features, params, seed) and
reports its intermediate tensors through a recorder. Reductions accumulate
in float64 and store float32 results; each stage reads the stored (rounded)
output of the previous one, so per-cell provenance recomputes exactly up to
one final rounding. Aggregation factors (coeff, alpha, e_ij) are kept at
float64 so they round-trip exactly through the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGraph, NonFiniteInput, ShapeMismatch
from .graph import Graph, NeighborhoodView, neighborhood
from .trace import STAGES


def _f32(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float32)


@dataclass(frozen=True)
class DenseParams:
    """Affine transform W x + b; W is [out_dim, in_dim]."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "W", _f32(self.W))
        object.__setattr__(self, "b", _f32(self.b))
        if self.W.ndim != 2 or self.b.ndim != 1:
            raise ShapeMismatch("W must be a matrix and b a vector")
        if self.b.shape[0] != self.W.shape[0]:
            raise ShapeMismatch(
                f"b has {self.b.shape[0]} entries for {self.W.shape[0]} output rows"
            )

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class GatParams:
    """Single-head attention: W [out_dim, in_dim], a [2*out_dim], no bias."""

    W: np.ndarray
    a: np.ndarray
    leaky_slope: float = 0.2

    def __post_init__(self) -> None:
        object.__setattr__(self, "W", _f32(self.W))
        object.__setattr__(self, "a", _f32(self.a))
        if self.W.ndim != 2 or self.a.ndim != 1:
            raise ShapeMismatch("W must be a matrix and a a vector")
        if self.a.shape[0] != 2 * self.W.shape[0]:
            raise ShapeMismatch(
                f"attention vector has {self.a.shape[0]} entries, "
                f"expected {2 * self.W.shape[0]}"
            )
        if not (0.0 < self.leaky_slope < 1.0):
            raise ShapeMismatch(f"leaky_slope {self.leaky_slope} outside (0, 1)")

    @property
    def out_dim(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class SageParams:
    """Separate self/neighbor transforms over a sampled mean aggregator."""

    W_self: np.ndarray
    W_neigh: np.ndarray
    b: np.ndarray
    sample_size: int = 25

    def __post_init__(self) -> None:
        object.__setattr__(self, "W_self", _f32(self.W_self))
        object.__setattr__(self, "W_neigh", _f32(self.W_neigh))
        object.__setattr__(self, "b", _f32(self.b))
        if self.W_self.shape != self.W_neigh.shape:
            raise ShapeMismatch("W_self and W_neigh must share a shape")
        if self.b.shape[0] != self.W_self.shape[0]:
            raise ShapeMismatch("b length must equal the output dimension")
        if self.sample_size < 1:
            raise ShapeMismatch("sample_size must be >= 1")

    @property
    def out_dim(self) -> int:
        return self.W_self.shape[0]


@dataclass(frozen=True)
class MlpParams:
    """Affine layers with rectifier between them; final layer emits logits."""

    layers: tuple[DenseParams, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ShapeMismatch("an MLP needs at least one layer")
        for t in range(1, len(layers)):
            if layers[t].in_dim != layers[t - 1].out_dim:
                raise ShapeMismatch(
                    f"MLP layer {t} expects {layers[t].in_dim} inputs but "
                    f"layer {t - 1} emits {layers[t - 1].out_dim}"
                )


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

def relu(v):
    """Elementwise max(0, x)."""
    return np.maximum(np.asarray(v), 0)


def leaky_relu(v, slope: float):
    """x where x >= 0, slope*x elsewhere."""
    v = np.asarray(v)
    return np.where(v >= 0, v, slope * v)


def softmax_over_neighborhood(logits) -> np.ndarray:
    """Stable softmax (max-subtracted) over one neighborhood's scores."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.size == 0:
        raise NonFiniteInput("softmax over an empty neighborhood")
    if not np.all(np.isfinite(logits)):
        raise NonFiniteInput("softmax input contains non-finite values")
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


# ---------------------------------------------------------------------------
# GNN layers
# ---------------------------------------------------------------------------

def _check_input(g: Graph, X: np.ndarray, in_dim: int) -> np.ndarray:
    X = _f32(X)
    if X.ndim != 2 or X.shape[0] != g.node_count:
        raise ShapeMismatch(
            f"feature matrix is {X.shape}, expected {g.node_count} rows"
        )
    if X.shape[1] != in_dim:
        raise ShapeMismatch(
            f"features have {X.shape[1]} dims but the layer expects {in_dim}"
        )
    return X


def gcn_layer_forward(g: Graph, X, p: DenseParams, rec) -> np.ndarray:
    """relu(W · Σ_{j∈N(i)∪i} x_j/√(d_i d_j) + b) for every node i."""
    X = _check_input(g, X, p.in_dim)
    stages = STAGES["gcn"]
    L = rec.begin_layer("gcn", "gcn_conv")
    rec.record_step(L, None, "W", p.W.shape, p.W, stages["W"])
    rec.record_step(L, None, "b", p.b.shape, p.b, stages["b"])
    for j in range(g.node_count):
        rec.record_step(L, j, "x_j", (p.in_dim,), X[j], stages["x_j"])

    X64 = X.astype(np.float64)
    W64 = p.W.astype(np.float64)
    b64 = p.b.astype(np.float64)
    out = np.zeros((g.node_count, p.out_dim), dtype=np.float32)
    for i in range(g.node_count):
        view = neighborhood(g, i)
        coeffs = np.asarray(view.coefficients, dtype=np.float64)
        rec.record_step(L, i, "coeff", (len(view.members),), coeffs,
                        stages["coeff"])
        for m, j in enumerate(view.members):
            rec.add_edge_curve(L, j, i, coeffs[m], "none")
        agg = _f32(coeffs @ X64[list(view.members)])
        rec.record_step(L, i, "agg", (p.in_dim,), agg, stages["agg"])
        wx = _f32(W64 @ agg.astype(np.float64))
        rec.record_step(L, i, "Wx", (p.out_dim,), wx, stages["Wx"])
        biased = _f32(wx.astype(np.float64) + b64)
        rec.record_step(L, i, "bias_add", (p.out_dim,), biased,
                        stages["bias_add"])
        out[i] = relu(biased)
        rec.record_step(L, i, "activation", (p.out_dim,), out[i],
                        stages["activation"])
    return out


def gat_attention(
    g: Graph, X, p: GatParams
) -> tuple[list[NeighborhoodView], list[np.ndarray]]:
    """Attention coefficients per node: e_ij = leaky(aᵀ[Wx_i ∥ Wx_j]), α = softmax.

    Returns one NeighborhoodView per node (coefficients = α over the sorted
    members) and the aligned raw scores e_i· as float64 arrays.
    """
    X = _check_input(g, X, p.W.shape[1])
    W64 = p.W.astype(np.float64)
    a64 = p.a.astype(np.float64)
    half = p.out_dim
    # transformed features as the layer stores them: per-node f32 rounding
    wx32 = _f32(X.astype(np.float64) @ W64.T)
    wx64 = wx32.astype(np.float64)

    views: list[NeighborhoodView] = []
    scores: list[np.ndarray] = []
    for i in range(g.node_count):
        members = tuple(sorted(set(g.neighbors[i]) | {i}))
        raw = np.empty(len(members), dtype=np.float64)
        for m, j in enumerate(members):
            raw[m] = a64[:half] @ wx64[i] + a64[half:] @ wx64[j]
        e = np.where(raw >= 0, raw, p.leaky_slope * raw)
        alpha = softmax_over_neighborhood(e)
        views.append(NeighborhoodView(center=i, members=members,
                                      coefficients=tuple(alpha.tolist())))
        scores.append(e)
    return views, scores


def gat_layer_forward(g: Graph, X, p: GatParams, rec) -> np.ndarray:
    """relu(Σ_{j∈N(i)∪i} α_ij · W x_j) with softmax-normalized attention."""
    X = _check_input(g, X, p.W.shape[1])
    stages = STAGES["gat"]
    L = rec.begin_layer("gat", "gat_score_1")
    rec.record_step(L, None, "W", p.W.shape, p.W, stages["W"])
    rec.record_step(L, None, "a", p.a.shape, p.a, stages["a"])

    W64 = p.W.astype(np.float64)
    wx32 = _f32(X.astype(np.float64) @ W64.T)
    for j in range(g.node_count):
        rec.record_step(L, j, "x_j", (X.shape[1],), X[j], stages["x_j"])
        rec.record_step(L, j, "Wx", (p.out_dim,), wx32[j], stages["Wx"])

    views, scores = gat_attention(g, X, p)
    wx64 = wx32.astype(np.float64)
    out = np.zeros((g.node_count, p.out_dim), dtype=np.float32)
    for i, view in enumerate(views):
        rec.record_step(L, i, "e_ij", (len(view.members),), scores[i],
                        stages["e_ij"])
        alpha = np.asarray(view.coefficients, dtype=np.float64)
        rec.record_step(L, i, "alpha", (len(view.members),), alpha,
                        stages["alpha"])
        for m, j in enumerate(view.members):
            rec.add_edge_curve(L, j, i, alpha[m], "none")
        agg = _f32(alpha @ wx64[list(view.members)])
        rec.record_step(L, i, "agg", (p.out_dim,), agg, stages["agg"])
        out[i] = relu(agg)
        rec.record_step(L, i, "activation", (p.out_dim,), out[i],
                        stages["activation"])
    return out


def sample_neighbors(g: Graph, i: int, size: int, rng_seed: int) -> list[int]:
    """Uniform sample without replacement from N(i); all of N(i) if small.

    Deterministic: the generator is seeded with [rng_seed, i], the candidate
    list is ascending, and the result is sorted. This derivation is part of
    the golden-file contract (see docs/formats.md).
    """
    from .graph import _check_node

    i = _check_node(g, i)
    size = int(size)
    if size < 1:
        raise ShapeMismatch("sample size must be >= 1")
    neigh = list(g.neighbors[i])
    if len(neigh) <= size:
        return neigh
    rng = np.random.default_rng([int(rng_seed), i])
    picked = rng.choice(np.asarray(neigh, dtype=np.int64), size=size,
                        replace=False)
    return sorted(int(x) for x in picked)


def sage_layer_forward(g: Graph, X, p: SageParams, rng_seed: int, rec) -> np.ndarray:
    """relu(W_self·x_i + W_neigh·mean_{j∈S(i)} x_j + b) over sampled S(i)."""
    X = _check_input(g, X, p.W_self.shape[1])
    stages = STAGES["sage"]
    L = rec.begin_layer("sage", "sage_conv")
    rec.record_step(L, None, "W", p.W_self.shape, p.W_self, stages["W"],
                    role="self weight matrix", key="self")
    rec.record_step(L, None, "W", p.W_neigh.shape, p.W_neigh, stages["W"],
                    role="neighbor weight matrix", key="neigh")
    rec.record_step(L, None, "b", p.b.shape, p.b, stages["b"])
    for j in range(g.node_count):
        rec.record_step(L, j, "x_j", (X.shape[1],), X[j], stages["x_j"])

    X64 = X.astype(np.float64)
    Ws64 = p.W_self.astype(np.float64)
    Wn64 = p.W_neigh.astype(np.float64)
    b64 = p.b.astype(np.float64)
    out = np.zeros((g.node_count, p.out_dim), dtype=np.float32)
    for i in range(g.node_count):
        sampled = sample_neighbors(g, i, p.sample_size, rng_seed)
        rec.record_step(L, i, "sample", (len(sampled),),
                        np.asarray(sampled, dtype=np.float64), stages["sample"])
        if sampled:
            mean = _f32(X64[sampled].mean(axis=0))
            share = 1.0 / len(sampled)
            for j in sampled:
                rec.add_edge_curve(L, j, i, share, "sample")
        else:
            mean = np.zeros(X.shape[1], dtype=np.float32)
        rec.add_edge_curve(L, i, i, 1.0, "none")
        rec.record_step(L, i, "mean", (X.shape[1],), mean, stages["mean"])
        wx_self = _f32(Ws64 @ X64[i])
        rec.record_step(L, i, "Wx_self", (p.out_dim,), wx_self,
                        stages["Wx_self"])
        wx_neigh = _f32(Wn64 @ mean.astype(np.float64))
        rec.record_step(L, i, "Wx_neigh", (p.out_dim,), wx_neigh,
                        stages["Wx_neigh"])
        agg = _f32(wx_self.astype(np.float64) + wx_neigh.astype(np.float64))
        rec.record_step(L, i, "agg", (p.out_dim,), agg, stages["agg"])
        biased = _f32(agg.astype(np.float64) + b64)
        rec.record_step(L, i, "bias_add", (p.out_dim,), biased,
                        stages["bias_add"])
        out[i] = relu(biased)
        rec.record_step(L, i, "activation", (p.out_dim,), out[i],
                        stages["activation"])
    return out


# ---------------------------------------------------------------------------
# task heads
# ---------------------------------------------------------------------------

def global_mean_pool(X, rec) -> np.ndarray:
    """Column means over all nodes; exact under row permutation (fsum)."""
    X = _f32(X)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyGraph("cannot pool an empty feature matrix")
    n, dim = X.shape
    pooled = _f32([math.fsum(float(v) for v in X[:, d]) / n for d in range(dim)])
    L = rec.begin_layer("pool", "pool_mean")
    rec.record_step(L, None, "pool", (dim,), pooled, STAGES["pool"]["pool"])
    for i in range(n):
        rec.add_edge_curve(L, i, None, 1.0 / n, "pool")
    return pooled


def mlp_forward(x, p: MlpParams, rec) -> np.ndarray:
    """Affine chain with rectifiers between layers; final layer emits logits.

    A 1-D input is one vector (graph-level scope); a 2-D input is applied
    rowwise with one scope per node. Each affine layer becomes its own trace
    layer so the reveal order stays monotone.
    """
    x = _f32(x)
    rowwise = x.ndim == 2
    if not rowwise and x.ndim != 1:
        raise ShapeMismatch(f"MLP input must be 1-D or 2-D, got {x.ndim}-D")
    rows = x if rowwise else x[None, :]
    if rows.shape[1] != p.layers[0].in_dim:
        raise ShapeMismatch(
            f"MLP expects {p.layers[0].in_dim} inputs, got {rows.shape[1]}"
        )
    scopes = list(range(rows.shape[0])) if rowwise else [None]
    stages = STAGES["mlp"]

    for t, dense in enumerate(p.layers):
        final = t == len(p.layers) - 1
        L = rec.begin_layer("mlp", "mlp_affine")
        rec.record_step(L, None, "W", dense.W.shape, dense.W, stages["W"])
        rec.record_step(L, None, "b", dense.b.shape, dense.b, stages["b"])
        W64 = dense.W.astype(np.float64)
        b64 = dense.b.astype(np.float64)
        nxt = np.zeros((rows.shape[0], dense.out_dim), dtype=np.float32)
        for r, scope in enumerate(scopes):
            rec.record_step(L, scope, "x_j", (dense.in_dim,), rows[r],
                            stages["x_j"])
            if scope is not None:
                rec.add_edge_curve(L, scope, scope, 1.0, "matmul")
            wx = _f32(W64 @ rows[r].astype(np.float64))
            rec.record_step(L, scope, "Wx", (dense.out_dim,), wx, stages["Wx"])
            biased = _f32(wx.astype(np.float64) + b64)
            rec.record_step(L, scope, "bias_add", (dense.out_dim,), biased,
                            stages["bias_add"])
            if final:
                nxt[r] = biased
                rec.record_step(L, scope, "logits", (dense.out_dim,), biased,
                                stages["logits"])
            else:
                nxt[r] = relu(biased)
                rec.record_step(L, scope, "activation", (dense.out_dim,),
                                nxt[r], stages["activation"])
        rows = nxt
    return rows if rowwise else rows[0]


def dot_product_score(u, v, rec) -> tuple[float, float]:
    """Σ u_d·v_d and its logistic squash; the link-prediction head.

    Records the score into the recorder's current layer (the caller begins
    the dot layer and records the two endpoint inputs).
    """
    u, v = _f32(u), _f32(v)
    if u.shape != v.shape or u.ndim != 1:
        raise ShapeMismatch(f"dot product needs equal-length vectors, "
                            f"got {u.shape} and {v.shape}")
    # final prediction scalar: kept at float64 so provenance is exact
    raw = float(u.astype(np.float64) @ v.astype(np.float64))
    probability = 1.0 / (1.0 + math.exp(-raw))
    rec.record_step(rec.current_layer_index, None, "dot", (1,), [raw],
                    STAGES["dot"]["dot"])
    return raw, probability
