"""Hierarchical computation traces: model → layer → step → cell provenance.

A forward pass records symbol-tagged tensor steps through a TraceRecorder.
The finished Trace is immutable, serializes to deterministic JSON (identical
inputs yield byte-identical documents), and supports three query surfaces:

* ``symbol_lookup`` — formula symbol → step ids (math↔vis linking);
* ``neighborhood_highlight`` — which previous-layer nodes fed a node, with
  the exact aggregation factors used;
* ``cell_provenance`` — the per-scalar arithmetic behind one heatmap cell,
  reconstructed from the trace alone so it works on deserialized traces.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IncompleteTrace,
    InputStepHasNoProvenance,
    ShapeMismatch,
    StageOrderViolation,
    UnknownLayer,
    UnknownNode,
    UnknownStep,
)

SCHEMA_VERSION = 1

SYMBOLS = frozenset(
    {
        "x_j", "coeff", "agg", "Wx", "Wx_self", "Wx_neigh", "bias_add",
        "activation", "alpha", "e_ij", "sample", "mean", "pool", "dot",
        "logits", "W", "b", "a",
    }
)

ICONS = frozenset({"none", "matmul", "sample", "pool", "dot"})

# Per-symbol reveal stage within a layer, keyed by layer kind. Stages follow
# the computation order; the flowchart reveal animates them in this order.
STAGES: dict[str, dict[str, int]] = {
    "gcn": {"W": 0, "b": 0, "x_j": 1, "coeff": 1, "agg": 2, "Wx": 3,
            "bias_add": 4, "activation": 5},
    "gat": {"W": 0, "a": 0, "x_j": 1, "Wx": 2, "e_ij": 3, "alpha": 4,
            "agg": 5, "activation": 6},
    "sage": {"W": 0, "b": 0, "x_j": 1, "sample": 1, "mean": 2,
             "Wx_self": 3, "Wx_neigh": 3, "agg": 4, "bias_add": 5,
             "activation": 6},
    "mlp": {"W": 0, "b": 0, "x_j": 1, "Wx": 2, "bias_add": 3,
            "activation": 4, "logits": 4},
    "pool": {"pool": 1},
    "dot": {"x_j": 1, "dot": 2, "logits": 3},
}

# Ordered stage categories per kind; a step in a later category must carry a
# strictly larger stage_order than every recorded step of an earlier one.
_CHAINS: dict[str, dict[str, int]] = {
    "gcn": {"agg": 0, "Wx": 1, "bias_add": 2, "activation": 3},
    "sage": {"mean": 0, "Wx_self": 1, "Wx_neigh": 1, "agg": 2, "bias_add": 3,
             "activation": 4},
    "gat": {"Wx": 0, "e_ij": 1, "alpha": 2, "agg": 3, "activation": 4},
    "mlp": {"Wx": 0, "bias_add": 1, "activation": 2, "logits": 2},
    "pool": {},
    "dot": {"dot": 0, "logits": 1},
}

_KIND_LABELS = {
    "gcn": "GCNConv", "gat": "GATConv", "sage": "SAGEConv",
    "pool": "GlobalMeanPool", "mlp": "Linear", "dot": "DotProduct",
}

_ROLES = {
    "x_j": "layer input features",
    "coeff": "neighborhood aggregation coefficients",
    "agg": "aggregated neighborhood features",
    "Wx": "weight matrix applied",
    "Wx_self": "self weight matrix applied",
    "Wx_neigh": "neighbor weight matrix applied",
    "bias_add": "bias added",
    "activation": "rectifier output",
    "alpha": "normalized attention coefficients",
    "e_ij": "raw attention scores",
    "sample": "sampled neighbor indices",
    "mean": "mean of sampled neighbor features",
    "pool": "graph-level mean of node features",
    "dot": "dot product of endpoint features",
    "logits": "output logits",
    "W": "weight matrix",
    "b": "bias vector",
    "a": "attention vector",
}


def _sid(layer_index: int, node_scope: int | None, symbol: str,
         key: str | None = None) -> str:
    scope = "g" if node_scope is None else f"n{node_scope}"
    sid = f"L{layer_index}.{scope}.{symbol}"
    return sid if key is None else f"{sid}.{key}"


@dataclass(frozen=True)
class TraceStep:
    step_id: str
    layer_index: int
    node_scope: int | None
    symbol: str
    role: str
    shape: tuple[int, ...]
    values: np.ndarray  # flat, row-major
    stage_order: int


@dataclass(frozen=True)
class EdgeCurve:
    source: int
    target: int | None  # None for graph-level sinks (pool, dot, link score)
    coefficient: float
    icon: str


@dataclass
class LayerTrace:
    name: str
    kind: str
    formula_id: str
    steps: list[TraceStep] = field(default_factory=list)
    edge_curves: list[EdgeCurve] = field(default_factory=list)

    def find(self, node_scope: int | None, symbol: str) -> TraceStep | None:
        for s in self.steps:
            if s.node_scope == node_scope and s.symbol == symbol:
                return s
        return None


@dataclass(frozen=True)
class Provenance:
    target: tuple[str, int]  # (step_id, flat cell index)
    op_kind: str
    terms: tuple[tuple[str, int, float], ...]  # (source step_id, cell, coefficient)


@dataclass
class Trace:
    trace_id: str
    model: dict  # {"variant", "task", "dataset_id"}
    graph_node_ids: tuple[str, ...]
    graph_edges: tuple[tuple[int, int], ...]
    layers: list[LayerTrace]
    final_step_id: str
    _steps_by_id: dict[str, TraceStep] = field(default_factory=dict, repr=False)
    _adjacency: dict[int, list[int]] | None = field(default=None, repr=False)

    def step(self, step_id: str) -> TraceStep:
        try:
            return self._steps_by_id[step_id]
        except KeyError:
            raise UnknownStep(f"no step {step_id!r} in trace {self.trace_id}") from None

    def members_of(self, node: int) -> list[int]:
        """Sorted N(node) ∪ {node} over the traced (sub)graph."""
        if self._adjacency is None:
            adj: dict[int, list[int]] = {i: [] for i in range(len(self.graph_node_ids))}
            for u, v in self.graph_edges:
                adj[u].append(v)
                adj[v].append(u)
            self._adjacency = adj
        if node not in self._adjacency:
            raise UnknownNode(f"node {node} not in traced graph")
        return sorted(set(self._adjacency[node]) | {node})


class TraceRecorder:
    """Mutable builder for one forward pass; exclusively owned by it."""

    def __init__(self) -> None:
        self._layers: list[LayerTrace] = []
        self._ids: set[str] = set()
        self._kind_counts: dict[str, int] = {}
        # per layer: category rank -> (min stage seen, max stage seen)
        self._stage_spans: list[dict[int, tuple[int, int]]] = []

    @property
    def layer_count(self) -> int:
        return len(self._layers)

    @property
    def current_layer_index(self) -> int:
        return len(self._layers) - 1

    def begin_layer(self, kind: str, formula_id: str, name: str | None = None) -> int:
        if kind not in STAGES:
            raise ValueError(f"unknown layer kind {kind!r}")
        if name is None:
            count = self._kind_counts.get(kind, 0) + 1
            self._kind_counts[kind] = count
            label = _KIND_LABELS[kind]
            name = label if kind in ("pool", "dot") else f"{label}{count}"
        self._layers.append(LayerTrace(name=name, kind=kind, formula_id=formula_id))
        self._stage_spans.append({})
        return len(self._layers) - 1

    def record_step(
        self,
        layer_index: int,
        node_scope: int | None,
        symbol: str,
        shape,
        values,
        stage_order: int,
        role: str | None = None,
        key: str | None = None,
    ) -> str:
        if not (0 <= layer_index < len(self._layers)):
            raise UnknownLayer(f"layer {layer_index} not begun")
        if symbol not in SYMBOLS:
            raise ValueError(f"unknown symbol {symbol!r}")
        layer = self._layers[layer_index]
        shape = tuple(int(s) for s in shape)
        flat = np.ravel(np.asarray(values))
        expected = int(np.prod(shape)) if shape else 1
        if flat.size != expected:
            raise ShapeMismatch(
                f"step {symbol}: {flat.size} values for shape {shape}"
            )
        self._check_stage(layer_index, layer.kind, symbol, int(stage_order))

        step_id = _sid(layer_index, node_scope, symbol, key)
        if step_id in self._ids:
            raise ValueError(f"step {step_id} recorded twice")
        self._ids.add(step_id)
        if role is None:
            role = _ROLES[symbol]
            if node_scope is not None:
                role = f"{role} (node {node_scope})"
        step = TraceStep(
            step_id=step_id,
            layer_index=layer_index,
            node_scope=node_scope,
            symbol=symbol,
            role=role,
            shape=shape,
            values=flat,
            stage_order=int(stage_order),
        )
        layer.steps.append(step)
        return step_id

    def _check_stage(self, layer_index: int, kind: str, symbol: str, stage: int) -> None:
        chain = _CHAINS[kind]
        rank = chain.get(symbol)
        if rank is None:
            return  # inputs and parameters are outside the monotone chain
        spans = self._stage_spans[layer_index]
        for other_rank, (lo, hi) in spans.items():
            if other_rank < rank and stage <= hi:
                raise StageOrderViolation(
                    f"{symbol} at stage {stage} does not follow earlier-category "
                    f"steps (max stage {hi}) in layer {layer_index}"
                )
            if other_rank > rank and stage >= lo:
                raise StageOrderViolation(
                    f"{symbol} at stage {stage} does not precede later-category "
                    f"steps (min stage {lo}) in layer {layer_index}"
                )
        lo, hi = spans.get(rank, (stage, stage))
        spans[rank] = (min(lo, stage), max(hi, stage))

    def add_edge_curve(
        self,
        layer_index: int,
        source: int,
        target: int | None,
        coefficient: float,
        icon: str = "none",
    ) -> None:
        if not (0 <= layer_index < len(self._layers)):
            raise UnknownLayer(f"layer {layer_index} not begun")
        if icon not in ICONS:
            raise ValueError(f"unknown curve icon {icon!r}")
        self._layers[layer_index].edge_curves.append(
            EdgeCurve(source=int(source),
                      target=None if target is None else int(target),
                      coefficient=float(coefficient), icon=icon)
        )

    def finish(self, model: dict, node_ids, edges, final_step_id: str) -> Trace:
        if final_step_id not in self._ids:
            raise IncompleteTrace(f"final step {final_step_id!r} was never recorded")
        trace = Trace(
            trace_id="",
            model=dict(model),
            graph_node_ids=tuple(str(x) for x in node_ids),
            graph_edges=tuple((int(u), int(v)) for u, v in edges),
            layers=self._layers,
            final_step_id=final_step_id,
        )
        for layer in trace.layers:
            for s in layer.steps:
                trace._steps_by_id[s.step_id] = s
        trace.trace_id = "t" + hashlib.sha256(_canonical_bytes(trace)).hexdigest()[:16]
        return trace


class NullRecorder:
    """Recorder stand-in that drops everything; for untraced kernel runs."""

    current_layer_index = 0

    def begin_layer(self, kind: str, formula_id: str, name: str | None = None) -> int:
        return 0

    def record_step(self, *args, **kwargs) -> str:
        return ""

    def add_edge_curve(self, *args, **kwargs) -> None:
        pass


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _payload(trace: Trace) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "trace_id": trace.trace_id,
        "model": trace.model,
        "graph": {
            "node_ids": list(trace.graph_node_ids),
            "edges": [[u, v] for u, v in trace.graph_edges],
        },
        "layers": [
            {
                "name": layer.name,
                "kind": layer.kind,
                "formula_id": layer.formula_id,
                "edge_curves": [
                    {"source": c.source, "target": c.target,
                     "coefficient": c.coefficient, "icon": c.icon}
                    for c in layer.edge_curves
                ],
                "steps": [
                    {
                        "step_id": s.step_id,
                        "node_scope": s.node_scope,
                        "symbol": s.symbol,
                        "role": s.role,
                        "shape": list(s.shape),
                        "values": [float(v) for v in s.values],
                        "stage_order": s.stage_order,
                    }
                    for s in layer.steps
                ],
            }
            for layer in trace.layers
        ],
        "final_step_id": trace.final_step_id,
    }


def _canonical_bytes(trace: Trace) -> bytes:
    return json.dumps(_payload(trace), sort_keys=True,
                      separators=(",", ":")).encode("utf-8")


def serialize_trace(trace: Trace) -> bytes:
    """Deterministic JSON bytes; identical traces serialize identically."""
    if trace.final_step_id not in trace._steps_by_id:
        raise IncompleteTrace("trace has no final prediction step")
    return _canonical_bytes(trace)


def parse_trace(data: bytes) -> Trace:
    doc = json.loads(data)
    trace = Trace(
        trace_id=doc["trace_id"],
        model=doc["model"],
        graph_node_ids=tuple(doc["graph"]["node_ids"]),
        graph_edges=tuple((int(u), int(v)) for u, v in doc["graph"]["edges"]),
        layers=[],
        final_step_id=doc["final_step_id"],
    )
    for li, ld in enumerate(doc["layers"]):
        layer = LayerTrace(name=ld["name"], kind=ld["kind"],
                           formula_id=ld["formula_id"])
        for cd in ld["edge_curves"]:
            layer.edge_curves.append(EdgeCurve(
                source=cd["source"], target=cd["target"],
                coefficient=cd["coefficient"], icon=cd["icon"]))
        for sd in ld["steps"]:
            step = TraceStep(
                step_id=sd["step_id"],
                layer_index=li,
                node_scope=sd["node_scope"],
                symbol=sd["symbol"],
                role=sd["role"],
                shape=tuple(sd["shape"]),
                values=np.asarray(sd["values"], dtype=np.float64),
                stage_order=sd["stage_order"],
            )
            layer.steps.append(step)
            trace._steps_by_id[step.step_id] = step
        trace.layers.append(layer)
    return trace


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def symbol_lookup(trace: Trace, layer_index: int, symbol: str) -> list[str]:
    """All step ids of one layer carrying a formula symbol (may be empty)."""
    if not (0 <= layer_index < len(trace.layers)):
        raise UnknownLayer(f"layer {layer_index} not in trace")
    if symbol not in SYMBOLS:
        raise ValueError(f"unknown symbol {symbol!r}")
    return [s.step_id for s in trace.layers[layer_index].steps if s.symbol == symbol]


def neighborhood_highlight(
    trace: Trace, layer_index: int, node: int
) -> tuple[list[int], list[float]]:
    """Previous-layer nodes that fed ``node`` here, with their factors.

    GCN/GAT return the full neighborhood with the recorded coeff/alpha
    values; SAGE returns the sampled set plus the self term (factor 1.0).
    """
    if not (0 <= layer_index < len(trace.layers)):
        raise UnknownLayer(f"layer {layer_index} not in trace")
    layer = trace.layers[layer_index]
    if layer.kind not in ("gcn", "gat", "sage"):
        raise UnknownLayer(f"layer {layer_index} ({layer.kind}) is not a GNN layer")
    if layer.find(node, "activation") is None:
        raise UnknownNode(f"node {node} not in scope of layer {layer_index}")

    if layer.kind == "sage":
        sample = _require(layer, node, "sample")
        sampled = [int(v) for v in sample.values]
        members = sorted(sampled + [node])
        share = 1.0 / len(sampled) if sampled else 0.0
        coeffs = [1.0 if m == node else share for m in members]
        return members, coeffs

    members = trace.members_of(node)
    symbol = "coeff" if layer.kind == "gcn" else "alpha"
    step = _require(layer, node, symbol)
    return members, [float(v) for v in step.values]


# ---------------------------------------------------------------------------
# cell provenance
# ---------------------------------------------------------------------------

_NO_PROVENANCE = {"W", "b", "a", "coeff", "sample"}


def _require(layer: LayerTrace, node_scope: int | None, symbol: str) -> TraceStep:
    step = layer.find(node_scope, symbol)
    if step is None:
        raise IncompleteTrace(
            f"layer {layer.name} lacks a {symbol} step for scope {node_scope}"
        )
    return step


def _copy_source(trace: Trace, step: TraceStep) -> TraceStep:
    """The previous-layer output an x_j step copies."""
    prev = trace.layers[step.layer_index - 1]
    for symbol in ("activation", "pool"):
        src = prev.find(step.node_scope, symbol)
        if src is not None:
            return src
    raise IncompleteTrace(
        f"no layer-{step.layer_index - 1} output feeds {step.step_id}"
    )


def cell_provenance(trace: Trace, step_id: str, cell: int) -> Provenance:
    """Exact arithmetic behind one cell: op kind + (source, coefficient) terms.

    Recomputing the target from the terms reproduces the stored value:
    weighted_sum / matmul_cell / add / mean_cell / dot_cell sum
    coefficient·source; max_zero clamps its single source; softmax_cell
    exp-normalizes over all listed sources with the numerator listed first.
    Attention-score cells fold the leaky-rectifier slope into their
    coefficients so the plain weighted sum reproduces the stored score.
    """
    step = trace.step(step_id)
    cell = int(cell)
    if not (0 <= cell < step.values.size):
        raise UnknownStep(f"cell {cell} outside step {step_id} ({step.values.size} cells)")
    if step.symbol in _NO_PROVENANCE or (step.symbol == "x_j" and step.layer_index == 0):
        raise InputStepHasNoProvenance(
            f"step {step_id} is an input or parameter step"
        )

    layer = trace.layers[step.layer_index]
    L, i = step.layer_index, step.node_scope
    terms: list[tuple[str, int, float]]

    if step.symbol == "x_j":
        src = _copy_source(trace, step)
        return Provenance((step_id, cell), "weighted_sum",
                          ((src.step_id, cell, 1.0),))

    if step.symbol == "agg":
        if layer.kind == "sage":  # combined self + neighbor transform
            terms = [(_sid(L, i, "Wx_self"), cell, 1.0),
                     (_sid(L, i, "Wx_neigh"), cell, 1.0)]
            return Provenance((step_id, cell), "add", tuple(terms))
        members = trace.members_of(i)
        if layer.kind == "gcn":
            coeffs = _require(layer, i, "coeff").values
            terms = [(_sid(L, j, "x_j"), cell, float(coeffs[m]))
                     for m, j in enumerate(members)]
        else:  # gat: weighted sum of transformed neighbors
            alphas = _require(layer, i, "alpha").values
            terms = [(_sid(L, j, "Wx"), cell, float(alphas[m]))
                     for m, j in enumerate(members)]
        return Provenance((step_id, cell), "weighted_sum", tuple(terms))

    if step.symbol == "mean":
        sampled = [int(v) for v in _require(layer, i, "sample").values]
        share = 1.0 / len(sampled) if sampled else 0.0
        terms = [(_sid(L, j, "x_j"), cell, share) for j in sampled]
        return Provenance((step_id, cell), "mean_cell", tuple(terms))

    if step.symbol in ("Wx", "Wx_self", "Wx_neigh"):
        key = {"Wx": None, "Wx_self": "self", "Wx_neigh": "neigh"}[step.symbol]
        wstep = trace.step(_sid(L, None, "W", key))
        out_dim, in_dim = wstep.shape
        w_row = wstep.values.reshape(out_dim, in_dim)[cell]
        if layer.kind == "gcn":
            src = _sid(L, i, "agg")
        elif step.symbol == "Wx_neigh":
            src = _sid(L, i, "mean")
        else:  # gat/mlp Wx and sage Wx_self act on the node's own input
            src = _sid(L, i, "x_j")
        terms = [(src, k, float(w_row[k])) for k in range(in_dim)]
        return Provenance((step_id, cell), "matmul_cell", tuple(terms))

    if step.symbol == "bias_add":
        bias = _require(layer, None, "b")
        if layer.kind == "sage":
            terms = [(_sid(L, i, "agg"), cell, 1.0), (bias.step_id, cell, 1.0)]
        else:
            terms = [(_sid(L, i, "Wx"), cell, 1.0), (bias.step_id, cell, 1.0)]
        return Provenance((step_id, cell), "add", tuple(terms))

    if step.symbol == "activation":
        src = "agg" if layer.kind == "gat" else "bias_add"
        return Provenance((step_id, cell), "max_zero",
                          ((_sid(L, i, src), cell, 1.0),))

    if step.symbol == "e_ij":
        members = trace.members_of(i)
        j = members[cell]
        a_vec = _require(layer, None, "a").values
        half = a_vec.size // 2
        wx_i = trace.step(_sid(L, i, "Wx")).values.astype(np.float64)
        wx_j = trace.step(_sid(L, j, "Wx")).values.astype(np.float64)
        raw = float(a_vec[:half] @ wx_i + a_vec[half:] @ wx_j)
        stored = float(step.values[cell])
        scale = 1.0 if raw >= 0 else stored / raw
        terms = [(_sid(L, i, "Wx"), d, float(a_vec[d]) * scale) for d in range(half)]
        terms += [(_sid(L, j, "Wx"), d, float(a_vec[half + d]) * scale)
                  for d in range(half)]
        return Provenance((step_id, cell), "weighted_sum", tuple(terms))

    if step.symbol == "alpha":
        e_id = _sid(L, i, "e_ij")
        size = trace.step(e_id).values.size
        ordered = [cell] + [k for k in range(size) if k != cell]
        return Provenance((step_id, cell), "softmax_cell",
                          tuple((e_id, k, 1.0) for k in ordered))

    if step.symbol == "pool":
        prev = trace.layers[L - 1]
        nodes = sorted(s.node_scope for s in prev.steps if s.symbol == "activation")
        share = 1.0 / len(nodes)
        return Provenance((step_id, cell), "mean_cell",
                          tuple((_sid(L - 1, n, "activation"), cell, share)
                                for n in nodes))

    if step.symbol == "dot":
        xjs = [s for s in layer.steps if s.symbol == "x_j"]
        if len(xjs) != 2:
            raise IncompleteTrace("dot layer needs exactly two endpoint inputs")
        u, v = xjs
        return Provenance((step_id, cell), "dot_cell",
                          tuple((u.step_id, d, float(v.values[d]))
                                for d in range(u.values.size)))

    if step.symbol == "logits":
        if layer.kind == "dot":
            if cell == 0:
                return Provenance((step_id, 0), "weighted_sum",
                                  ((_sid(L, None, "dot"), 0, 1.0),))
            return Provenance((step_id, cell), "weighted_sum", ())
        return Provenance((step_id, cell), "weighted_sum",
                          ((_sid(L, i, "bias_add"), cell, 1.0),))

    raise InputStepHasNoProvenance(f"step {step_id} has no derivable provenance")
