// Wire types mirroring the engine's JSON contracts (docs/formats.md).

export type Variant = "gcn" | "gat" | "sage";
export type Task =
  | "node_classification"
  | "graph_classification"
  | "link_prediction";
export type LayerKind = Variant | "pool" | "mlp" | "dot";
export type ViewKind = "node_link" | "matrix";

export interface CatalogEntry {
  variant: Variant;
  task: Task;
  dataset: string;
  bundle: string;
}

export interface DatasetInfo {
  id: string;
  kind: "single_graph" | "graph_collection";
  graph_count: number;
  feature_dim: number;
  class_names: string[];
}

export interface TraceStep {
  step_id: string;
  node_scope: number | null;
  symbol: string;
  role: string;
  shape: number[];
  values: number[];
  stage_order: number;
}

export interface EdgeCurve {
  source: number;
  target: number | null;
  coefficient: number;
  icon: "none" | "matmul" | "sample" | "pool" | "dot";
}

export interface TraceLayer {
  name: string;
  kind: LayerKind;
  formula_id: string;
  edge_curves: EdgeCurve[];
  steps: TraceStep[];
}

export interface TraceDoc {
  schema_version: number;
  trace_id: string;
  model: { variant: Variant; task: Task; dataset_id: string };
  graph: { node_ids: string[]; edges: [number, number][] };
  layers: TraceLayer[];
  final_step_id: string;
}

export interface Prediction {
  task: Task;
  target: number | number[] | "graph";
  logits: number[];
  probabilities: number[];
  predicted_class: number;
  trace_id: string;
}

export interface PredictResponse {
  prediction: Prediction;
  trace_id: string;
}

export interface ProvenanceTerm {
  step_id: string;
  cell: number;
  coefficient: number;
}

export interface ProvenancePayload {
  target: { step_id: string; cell: number };
  op_kind: string;
  terms: ProvenanceTerm[];
}

export interface HoverEntity {
  kind: "node" | "cell" | "formula_symbol" | "curve_icon";
  node?: number;
  stepId?: string;
  cell?: number;
  symbol?: string;
  icon?: string;
}
