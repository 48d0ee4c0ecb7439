"""Glass-box GNN inference engine with full computation traces."""

from .errors import EngineError
from .graph import (
    Graph,
    NeighborhoodView,
    build_graph,
    degree_with_self_loop,
    gcn_coefficient,
    k_hop_subgraph,
    neighborhood,
    permute_graph,
)
from .layers import (
    DenseParams,
    GatParams,
    MlpParams,
    SageParams,
    dot_product_score,
    gat_attention,
    gat_layer_forward,
    gcn_layer_forward,
    global_mean_pool,
    leaky_relu,
    mlp_forward,
    relu,
    sage_layer_forward,
    sample_neighbors,
    softmax_over_neighborhood,
)
from .model import (
    CatalogEntry,
    Model,
    ModelSpec,
    Prediction,
    WeightBundle,
    assemble,
    list_models,
    load_model,
    load_weight_bundle,
    load_weight_bundle_file,
    resolve_bundle,
)
from .datasets import (
    DatasetDescriptor,
    graph_to_json,
    load_dataset,
    parse_graph_json,
    select_inference_target,
)
from .trace import (
    NullRecorder,
    Provenance,
    Trace,
    TraceRecorder,
    TraceStep,
    cell_provenance,
    neighborhood_highlight,
    parse_trace,
    serialize_trace,
    symbol_lookup,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
