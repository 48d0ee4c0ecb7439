// Node-link view: the input graph and each layer's outputs as node-link
// diagrams; hovering a node shows its feature heatmap and highlights the
// previous-layer neighborhood with coefficient-encoded curves.

import { attentionColor, curveWidth, makeScale } from "../colors.js";
import { neighborhoodHighlight, nodeOutputs } from "../traceQuery.js";
import type { TraceDoc } from "../types.js";

export interface NodePos {
  node: number;
  id: string;
  x: number;
  y: number;
}

export interface HeatCell {
  value: number;
  color: string;
}

export interface HighlightCurve {
  source: number;
  target: number;
  coefficient: number;
  width: number;
  color: string;
}

export interface NodeLinkColumn {
  name: string;
  layerIndex: number | null; // null for the input column
  positions: NodePos[];
  hoveredFeature: HeatCell[] | null;
  highlightCurves: HighlightCurve[];
}

export function circularLayout(
  trace: TraceDoc,
  radius = 120,
): Map<number, { x: number; y: number }> {
  const n = trace.graph.node_ids.length;
  const out = new Map<number, { x: number; y: number }>();
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / n;
    out.set(i, {
      x: radius * Math.cos(angle),
      y: radius * Math.sin(angle),
    });
  }
  return out;
}

/**
 * One column per GNN layer (plus the input). Hovering a node in column L
 * highlights the previous column's contributing nodes; every number shown
 * comes from the trace payload (feature values, coefficients).
 */
export function renderNodeLink(
  trace: TraceDoc,
  hoveredNode: number | null,
  hoveredLayer: number | null,
): NodeLinkColumn[] {
  const layout = circularLayout(trace);
  const positions: NodePos[] = trace.graph.node_ids.map((id, node) => ({
    node,
    id,
    x: layout.get(node)!.x,
    y: layout.get(node)!.y,
  }));

  const allValues: number[] = [];
  for (const layer of trace.layers) {
    for (const step of layer.steps) allValues.push(...step.values);
  }
  const scale = makeScale(allValues);

  const columns: NodeLinkColumn[] = [
    {
      name: "Input",
      layerIndex: null,
      positions,
      hoveredFeature: hoverFeature(trace, null, hoveredNode, scale),
      highlightCurves: [],
    },
  ];
  trace.layers.forEach((layer, index) => {
    if (layer.kind !== "gcn" && layer.kind !== "gat" && layer.kind !== "sage") {
      return; // head layers live in the expanded flowchart
    }
    let curves: HighlightCurve[] = [];
    if (hoveredNode !== null && hoveredLayer === index) {
      const { members, coefficients } = neighborhoodHighlight(
        trace,
        index,
        hoveredNode,
      );
      curves = members.map((member, m) => ({
        source: member,
        target: hoveredNode,
        coefficient: coefficients[m],
        width: curveWidth(coefficients[m]),
        color:
          layer.kind === "gat"
            ? attentionColor(coefficients[m])
            : "steelblue",
      }));
    }
    columns.push({
      name: layer.name,
      layerIndex: index,
      positions,
      hoveredFeature: hoverFeature(trace, index, hoveredNode, scale),
      highlightCurves: curves,
    });
  });
  return columns;
}

function hoverFeature(
  trace: TraceDoc,
  layerIndex: number | null,
  node: number | null,
  scale: ReturnType<typeof makeScale>,
): HeatCell[] | null {
  if (node === null) return null;
  let values: number[] | undefined;
  if (layerIndex === null) {
    const first = trace.layers[0];
    values = first.steps.find(
      (s) => s.symbol === "x_j" && s.node_scope === node,
    )?.values;
  } else {
    values = nodeOutputs(trace.layers[layerIndex]).get(node)?.values;
  }
  if (!values) return null;
  return values.map((v) => ({ value: v, color: scale.toColor(v) }));
}
