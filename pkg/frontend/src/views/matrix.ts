// Matrix view: the adjacency matrix plus one feature matrix per layer,
// all node features visible simultaneously, sharing the node-link color
// scale. Hover mirrors the node-link highlight interaction.

import { makeScale } from "../colors.js";
import { neighborhoodHighlight, nodeOutputs } from "../traceQuery.js";
import type { TraceDoc } from "../types.js";
import type { HeatCell } from "./nodeLink.js";

export interface MatrixRow {
  node: number;
  id: string;
  cells: HeatCell[];
  highlighted: boolean;
  coefficient: number | null; // the factor feeding the hovered node
}

export interface LayerMatrix {
  name: string;
  layerIndex: number | null;
  rows: MatrixRow[];
}

export interface AdjacencyView {
  size: number;
  ones: [number, number][]; // connected cells incl. both orientations
}

export function renderAdjacency(trace: TraceDoc): AdjacencyView {
  const ones: [number, number][] = [];
  for (const [u, v] of trace.graph.edges) {
    ones.push([u, v]);
    ones.push([v, u]);
  }
  return { size: trace.graph.node_ids.length, ones };
}

export function renderMatrixStack(
  trace: TraceDoc,
  hoveredNode: number | null,
  hoveredLayer: number | null,
): LayerMatrix[] {
  const allValues: number[] = [];
  for (const layer of trace.layers) {
    for (const step of layer.steps) allValues.push(...step.values);
  }
  const scale = makeScale(allValues); // identical scale to the node-link view

  const stack: LayerMatrix[] = [];
  const inputRows: MatrixRow[] = trace.graph.node_ids.map((id, node) => {
    const step = trace.layers[0].steps.find(
      (s) => s.symbol === "x_j" && s.node_scope === node,
    );
    return {
      node,
      id,
      cells: (step?.values ?? []).map((v) => ({
        value: v,
        color: scale.toColor(v),
      })),
      highlighted: false,
      coefficient: null,
    };
  });
  stack.push({ name: "Input", layerIndex: null, rows: inputRows });

  trace.layers.forEach((layer, index) => {
    if (layer.kind !== "gcn" && layer.kind !== "gat" && layer.kind !== "sage") {
      return;
    }
    let highlight: Map<number, number> | null = null;
    if (hoveredNode !== null && hoveredLayer === index) {
      const { members, coefficients } = neighborhoodHighlight(
        trace,
        index,
        hoveredNode,
      );
      highlight = new Map(members.map((m, i) => [m, coefficients[i]]));
    }
    const outputs = nodeOutputs(layer);
    const rows: MatrixRow[] = trace.graph.node_ids.map((id, node) => ({
      node,
      id,
      cells: (outputs.get(node)?.values ?? []).map((v) => ({
        value: v,
        color: scale.toColor(v),
      })),
      highlighted: highlight?.has(node) ?? false,
      coefficient: highlight?.get(node) ?? null,
    }));
    stack.push({ name: layer.name, layerIndex: index, rows });
  });
  return stack;
}
