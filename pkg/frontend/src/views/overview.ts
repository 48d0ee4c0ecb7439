// Architecture strip next to the model/task selectors: one block per
// layer, derived from the catalog selection (before any prediction) or
// from a live trace (after one).

import type { Task, TraceDoc, Variant } from "../types.js";

export interface OverviewBlock {
  kind: "input" | Variant | "pool" | "mlp" | "dot";
  label: string;
  layerIndex: number | null; // index into trace.layers once a trace exists
}

const VARIANT_LABEL: Record<Variant, string> = {
  gcn: "GCNConv",
  gat: "GATConv",
  sage: "SAGEConv",
};

export function overviewFromSelection(
  variant: Variant,
  task: Task,
  gnnLayerCount = 2,
): OverviewBlock[] {
  const blocks: OverviewBlock[] = [
    { kind: "input", label: "Input graph", layerIndex: null },
  ];
  for (let i = 1; i <= gnnLayerCount; i++) {
    blocks.push({
      kind: variant,
      label: `${VARIANT_LABEL[variant]}${i}`,
      layerIndex: null,
    });
  }
  if (task === "graph_classification") {
    blocks.push({ kind: "pool", label: "GlobalMeanPool", layerIndex: null });
    blocks.push({ kind: "mlp", label: "MLP", layerIndex: null });
  } else if (task === "node_classification") {
    blocks.push({ kind: "mlp", label: "MLP", layerIndex: null });
  } else {
    blocks.push({ kind: "dot", label: "DotProduct", layerIndex: null });
  }
  return blocks;
}

export function overviewFromTrace(trace: TraceDoc): OverviewBlock[] {
  const blocks: OverviewBlock[] = [
    { kind: "input", label: "Input graph", layerIndex: null },
  ];
  trace.layers.forEach((layer, index) => {
    blocks.push({
      kind: layer.kind as OverviewBlock["kind"],
      label: layer.name,
      layerIndex: index,
    });
  });
  return blocks;
}
