"""Model specs, weight-bundle loading, and end-to-end prediction.

A WeightBundle is the engine's only import format for trained parameters:
one JSON document with a declarative spec and named row-major tensors (see
docs/formats.md). ``assemble`` binds a validated bundle into an immutable,
shareable Model whose ``predict`` runs the layers, records a full Trace,
and returns a task-typed Prediction referencing it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import paths
from .errors import (
    EmptyGraph,
    InvalidTarget,
    NonFiniteWeight,
    ParseError,
    ShapeMismatch,
    SpecMismatch,
    TooLargeToTrace,
    UnknownModel,
    UnsupportedVersion,
)
from .graph import Graph, k_hop_subgraph
from .layers import (
    DenseParams,
    GatParams,
    MlpParams,
    SageParams,
    dot_product_score,
    gat_layer_forward,
    gcn_layer_forward,
    global_mean_pool,
    mlp_forward,
    sage_layer_forward,
)
from .trace import STAGES, Trace, TraceRecorder, _sid

SUPPORTED_FORMAT_VERSION = 1
SUBGRAPH_NODE_THRESHOLD = 500  # larger graphs are k-hop extracted first
MAX_TRACE_NODES = 2000  # refuse to trace anything bigger post-extraction

VARIANTS = ("gcn", "gat", "sage")
TASKS = ("node_classification", "graph_classification", "link_prediction")
TASK_HEADS = {
    "node_classification": "per_node_mlp",
    "graph_classification": "pool_then_mlp",
    "link_prediction": "dot_product",
}
GAT_LEAKY_SLOPE = 0.2
SAGE_SAMPLE_SIZE = 25


@dataclass(frozen=True)
class ModelSpec:
    variant: str
    task: str
    gnn_layers: tuple[tuple[int, int], ...]
    head: str

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ParseError(f"unknown variant {self.variant!r}")
        if self.task not in TASKS:
            raise ParseError(f"unknown task {self.task!r}")
        if self.head != TASK_HEADS[self.task]:
            raise ParseError(
                f"task {self.task} requires head {TASK_HEADS[self.task]}, "
                f"got {self.head!r}"
            )
        layers = tuple((int(i), int(o)) for i, o in self.gnn_layers)
        object.__setattr__(self, "gnn_layers", layers)
        if not layers:
            raise ParseError("a model needs at least one GNN layer")
        for t in range(1, len(layers)):
            if layers[t][0] != layers[t - 1][1]:
                raise ShapeMismatch(
                    f"GNN layer {t} expects {layers[t][0]} inputs but layer "
                    f"{t - 1} emits {layers[t - 1][1]}"
                )

    @property
    def input_dim(self) -> int:
        return self.gnn_layers[0][0]

    @property
    def gnn_out_dim(self) -> int:
        return self.gnn_layers[-1][1]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "task": self.task,
            "gnn_layers": [list(p) for p in self.gnn_layers],
            "head": self.head,
        }

    @staticmethod
    def from_dict(doc: dict) -> "ModelSpec":
        try:
            return ModelSpec(
                variant=doc["variant"],
                task=doc["task"],
                gnn_layers=tuple(tuple(p) for p in doc["gnn_layers"]),
                head=doc["head"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model spec: {exc}") from exc


@dataclass(frozen=True)
class NamedTensor:
    name: str
    shape: tuple[int, ...]
    values: np.ndarray  # float32, row-major


@dataclass(frozen=True)
class WeightBundle:
    format_version: int
    spec: ModelSpec
    dataset_id: str
    parameters: tuple[NamedTensor, ...]
    training_metadata: dict[str, str]

    def tensor(self, name: str) -> np.ndarray:
        for t in self.parameters:
            if t.name == name:
                return t.values.reshape(t.shape)
        raise ShapeMismatch(f"bundle has no tensor named {name!r}")


def _expected_tensor_shapes(spec: ModelSpec) -> dict[str, tuple[int, ...]]:
    """The exact tensor inventory a bundle must carry for its spec.

    GNN layer dims are pinned by the spec; head layer dims are free except
    that they must compose (validated separately against the parameters).
    """
    expected: dict[str, tuple[int, ...]] = {}
    for idx, (in_dim, out_dim) in enumerate(spec.gnn_layers):
        prefix = f"gnn.{idx}"
        if spec.variant == "gcn":
            expected[f"{prefix}.W"] = (out_dim, in_dim)
            expected[f"{prefix}.b"] = (out_dim,)
        elif spec.variant == "gat":
            expected[f"{prefix}.W"] = (out_dim, in_dim)
            expected[f"{prefix}.a"] = (2 * out_dim,)
        else:
            expected[f"{prefix}.W_self"] = (out_dim, in_dim)
            expected[f"{prefix}.W_neigh"] = (out_dim, in_dim)
            expected[f"{prefix}.b"] = (out_dim,)
    return expected


def load_weight_bundle(data: bytes | str) -> WeightBundle:
    """Parse and validate a weight-bundle JSON document."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bundle is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("bundle document must be a JSON object")

    version = doc.get("format_version")
    if version != SUPPORTED_FORMAT_VERSION:
        raise UnsupportedVersion(
            f"bundle format_version {version!r}; this engine reads "
            f"{SUPPORTED_FORMAT_VERSION}"
        )
    for field in ("spec", "dataset_id", "parameters"):
        if field not in doc:
            raise ParseError(f"bundle is missing {field!r}")
    spec = ModelSpec.from_dict(doc["spec"])

    tensors: list[NamedTensor] = []
    by_name: dict[str, NamedTensor] = {}
    for entry in doc["parameters"]:
        try:
            name = entry["name"]
            shape = tuple(int(s) for s in entry["shape"])
            values = np.asarray(entry["values"], dtype=np.float32)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed parameter entry: {exc}") from exc
        if values.ndim != 1 or values.size != int(np.prod(shape)):
            raise ShapeMismatch(
                f"tensor {name!r}: {values.size} values for shape {list(shape)}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteWeight(f"tensor {name!r} contains non-finite values")
        if name in by_name:
            raise ParseError(f"tensor {name!r} appears twice")
        tensor = NamedTensor(name=name, shape=shape, values=values)
        tensors.append(tensor)
        by_name[name] = tensor

    expected = _expected_tensor_shapes(spec)
    for name, shape in expected.items():
        if name not in by_name:
            raise ShapeMismatch(f"bundle is missing tensor {name!r}")
        if by_name[name].shape != shape:
            raise ShapeMismatch(
                f"tensor {name!r} has shape {list(by_name[name].shape)}, "
                f"spec requires {list(shape)}"
            )

    head_names = sorted(n for n in by_name if n.startswith("head."))
    if spec.head == "dot_product":
        if head_names:
            raise ShapeMismatch(
                f"dot-product head takes no parameters, found {head_names[0]!r}"
            )
    else:
        _validate_head_tensors(spec, by_name, head_names)

    stray = [n for n in by_name
             if n not in expected and not n.startswith("head.")]
    if stray:
        raise ShapeMismatch(f"unexpected tensor {stray[0]!r} in bundle")

    metadata = {str(k): str(v)
                for k, v in dict(doc.get("training_metadata", {})).items()}
    return WeightBundle(
        format_version=version,
        spec=spec,
        dataset_id=str(doc["dataset_id"]),
        parameters=tuple(tensors),
        training_metadata=metadata,
    )


def _validate_head_tensors(spec: ModelSpec, by_name, head_names) -> None:
    count = 0
    while f"head.{count}.W" in by_name:
        count += 1
    if count == 0:
        raise ShapeMismatch("bundle is missing tensor 'head.0.W'")
    listed = {n for t in range(count) for n in (f"head.{t}.W", f"head.{t}.b")}
    for name in head_names:
        if name not in listed:
            raise ShapeMismatch(f"unexpected tensor {name!r} in bundle")
    prev_out = spec.gnn_out_dim
    for t in range(count):
        wname, bname = f"head.{t}.W", f"head.{t}.b"
        if bname not in by_name:
            raise ShapeMismatch(f"bundle is missing tensor {bname!r}")
        w, b = by_name[wname], by_name[bname]
        if len(w.shape) != 2 or w.shape[1] != prev_out:
            raise ShapeMismatch(
                f"tensor {wname!r} has shape {list(w.shape)}, expected "
                f"[*, {prev_out}]"
            )
        if b.shape != (w.shape[0],):
            raise ShapeMismatch(
                f"tensor {bname!r} has shape {list(b.shape)}, expected "
                f"[{w.shape[0]}]"
            )
        prev_out = w.shape[0]


def load_weight_bundle_file(path: str | Path) -> WeightBundle:
    return load_weight_bundle(Path(path).read_bytes())


@dataclass(frozen=True)
class Prediction:
    task: str
    target: object  # node index | (a, b) | "graph"
    logits: tuple[float, ...]
    probabilities: tuple[float, ...]
    predicted_class: int
    trace_id: str

    def to_dict(self) -> dict:
        target = list(self.target) if isinstance(self.target, tuple) else self.target
        return {
            "task": self.task,
            "target": target,
            "logits": list(self.logits),
            "probabilities": list(self.probabilities),
            "predicted_class": self.predicted_class,
            "trace_id": self.trace_id,
        }


def _softmax64(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits.astype(np.float64) - float(np.max(logits)))
    return shifted / shifted.sum()


class Model:
    """A weight-bound, immutable executable model."""

    def __init__(self, spec: ModelSpec, dataset_id: str,
                 gnn_params: list, head: MlpParams | None) -> None:
        self.spec = spec
        self.dataset_id = dataset_id
        self.gnn_params = tuple(gnn_params)
        self.head = head

    @property
    def input_dim(self) -> int:
        return self.spec.input_dim

    @property
    def layer_count(self) -> int:
        head_layers = len(self.head.layers) if self.head else 1
        if self.spec.head == "pool_then_mlp":
            head_layers += 1  # the pooling layer
        return len(self.spec.gnn_layers) + head_layers

    def predict(self, g: Graph, target, rng_seed: int = 0,
                max_trace_nodes: int = MAX_TRACE_NODES) -> tuple[Prediction, Trace]:
        """Run one forward pass; returns the Prediction and its full Trace."""
        if g.node_count == 0:
            raise EmptyGraph("cannot predict on an empty graph")
        if g.feature_dim != self.input_dim:
            raise ShapeMismatch(
                f"graph features have {g.feature_dim} dims, model expects "
                f"{self.input_dim}"
            )
        task = self.spec.task
        target = _validate_target(g, task, target)

        work = g
        local_target = target
        if task != "graph_classification" and g.node_count > SUBGRAPH_NODE_THRESHOLD:
            seeds = [target] if task == "node_classification" else list(target)
            work, index_map = k_hop_subgraph(g, seeds, len(self.spec.gnn_layers))
            if task == "node_classification":
                local_target = index_map[target]
            else:
                local_target = (index_map[target[0]], index_map[target[1]])
        if work.node_count > max_trace_nodes:
            raise TooLargeToTrace(
                f"{work.node_count} nodes after extraction exceeds the "
                f"{max_trace_nodes}-node trace bound"
            )

        rec = TraceRecorder()
        X = work.features
        for idx, params in enumerate(self.gnn_params):
            if self.spec.variant == "gcn":
                X = gcn_layer_forward(work, X, params, rec)
            elif self.spec.variant == "gat":
                X = gat_layer_forward(work, X, params, rec)
            else:
                X = sage_layer_forward(work, X, params, rng_seed + idx, rec)

        if task == "node_classification":
            Y = mlp_forward(X, self.head, rec)
            logits = Y[local_target]
            final_step = _sid(rec.current_layer_index, local_target, "logits")
        elif task == "graph_classification":
            pooled = global_mean_pool(X, rec)
            logits = mlp_forward(pooled, self.head, rec)
            final_step = _sid(rec.current_layer_index, None, "logits")
        else:
            a, b = local_target
            L = rec.begin_layer("dot", "link_dot")
            stages = STAGES["dot"]
            rec.record_step(L, a, "x_j", (X.shape[1],), X[a], stages["x_j"])
            rec.record_step(L, b, "x_j", (X.shape[1],), X[b], stages["x_j"])
            rec.add_edge_curve(L, a, None, 1.0, "dot")
            rec.add_edge_curve(L, b, None, 1.0, "dot")
            raw, _prob = dot_product_score(X[a], X[b], rec)
            logits = np.array([raw, 0.0], dtype=np.float64)
            rec.record_step(L, None, "logits", (2,), logits, stages["logits"])
            final_step = _sid(L, None, "logits")

        trace = rec.finish(
            model={"variant": self.spec.variant, "task": task,
                   "dataset_id": self.dataset_id},
            node_ids=work.node_ids,
            edges=work.edges,
            final_step_id=final_step,
        )
        logits = np.asarray(logits)
        probabilities = _softmax64(logits)
        prediction = Prediction(
            task=task,
            target=target,
            logits=tuple(float(v) for v in logits),
            probabilities=tuple(float(v) for v in probabilities),
            predicted_class=int(np.argmax(logits)),
            trace_id=trace.trace_id,
        )
        return prediction, trace


def _validate_target(g: Graph, task: str, target):
    if task == "graph_classification":
        if target not in (None, "graph"):
            raise InvalidTarget(
                f"graph classification takes the whole graph, got {target!r}"
            )
        return "graph"
    if task == "node_classification":
        try:
            node = int(target)
        except (TypeError, ValueError):
            raise InvalidTarget(f"node target must be an index, got {target!r}")
        if not (0 <= node < g.node_count):
            raise InvalidTarget(f"node {node} outside [0, {g.node_count})")
        return node
    try:
        a, b = (int(x) for x in target)
    except (TypeError, ValueError):
        raise InvalidTarget(f"link target must be a node pair, got {target!r}")
    for x in (a, b):
        if not (0 <= x < g.node_count):
            raise InvalidTarget(f"node {x} outside [0, {g.node_count})")
    if a == b:
        raise InvalidTarget(f"self-link ({a}, {b}) is not a valid target")
    return (a, b)


def assemble(spec: ModelSpec, bundle: WeightBundle) -> Model:
    """Bind a validated bundle to its spec; SpecMismatch if they disagree."""
    if bundle.spec != spec:
        raise SpecMismatch(
            f"bundle was exported for {bundle.spec.to_dict()}, not "
            f"{spec.to_dict()}"
        )
    gnn_params = []
    for idx, (in_dim, out_dim) in enumerate(spec.gnn_layers):
        prefix = f"gnn.{idx}"
        if spec.variant == "gcn":
            gnn_params.append(DenseParams(W=bundle.tensor(f"{prefix}.W"),
                                          b=bundle.tensor(f"{prefix}.b")))
        elif spec.variant == "gat":
            gnn_params.append(GatParams(W=bundle.tensor(f"{prefix}.W"),
                                        a=bundle.tensor(f"{prefix}.a"),
                                        leaky_slope=GAT_LEAKY_SLOPE))
        else:
            gnn_params.append(SageParams(W_self=bundle.tensor(f"{prefix}.W_self"),
                                         W_neigh=bundle.tensor(f"{prefix}.W_neigh"),
                                         b=bundle.tensor(f"{prefix}.b"),
                                         sample_size=SAGE_SAMPLE_SIZE))
    head = None
    if spec.head != "dot_product":
        dense = []
        t = 0
        while True:
            try:
                W = bundle.tensor(f"head.{t}.W")
            except ShapeMismatch:
                break
            dense.append(DenseParams(W=W, b=bundle.tensor(f"head.{t}.b")))
            t += 1
        head = MlpParams(layers=tuple(dense))
    return Model(spec=spec, dataset_id=bundle.dataset_id,
                 gnn_params=gnn_params, head=head)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    variant: str
    task: str
    dataset_id: str
    path: Path

    def to_dict(self) -> dict:
        return {"variant": self.variant, "task": self.task,
                "dataset": self.dataset_id, "bundle": self.path.name}


def list_models(bundle_dir: str | Path | None = None) -> list[CatalogEntry]:
    """All shipped (variant, task, dataset) bundles, stably ordered."""
    directory = Path(bundle_dir) if bundle_dir else paths.bundle_dir()
    entries = []
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text())
            spec = ModelSpec.from_dict(doc["spec"])
            dataset_id = str(doc["dataset_id"])
        except (OSError, KeyError, ValueError, ParseError) as exc:
            raise ParseError(f"unreadable bundle {path.name}: {exc}") from exc
        entries.append(CatalogEntry(variant=spec.variant, task=spec.task,
                                    dataset_id=dataset_id, path=path))
    entries.sort(key=lambda e: (e.variant, e.task, e.dataset_id))
    return entries


def resolve_bundle(variant: str, task: str, dataset_id: str | None = None,
                   bundle_dir: str | Path | None = None) -> CatalogEntry:
    """Find the unique catalog entry for (variant, task[, dataset])."""
    matches = [
        e for e in list_models(bundle_dir)
        if e.variant == variant and e.task == task
        and (dataset_id is None or e.dataset_id == dataset_id)
    ]
    if not matches:
        raise UnknownModel(
            f"no bundle for variant={variant} task={task}"
            + (f" dataset={dataset_id}" if dataset_id else "")
        )
    return matches[0]


def load_model(entry: CatalogEntry) -> Model:
    bundle = load_weight_bundle_file(entry.path)
    return assemble(bundle.spec, bundle)
