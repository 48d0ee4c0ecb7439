// Client-side queries over the trace payload. These mirror the engine's
// trace semantics exactly (the test suite pins them to engine-emitted
// fixtures); all numbers come straight out of the payload.

import type { TraceDoc, TraceLayer, TraceStep } from "./types.js";

export function stepById(trace: TraceDoc, stepId: string): TraceStep {
  for (const layer of trace.layers) {
    for (const step of layer.steps) {
      if (step.step_id === stepId) return step;
    }
  }
  throw new Error(`no step ${stepId} in trace ${trace.trace_id}`);
}

export function findStep(
  layer: TraceLayer,
  nodeScope: number | null,
  symbol: string,
): TraceStep | undefined {
  return layer.steps.find(
    (s) => s.node_scope === nodeScope && s.symbol === symbol,
  );
}

/** Sorted N(node) ∪ {node} over the traced (sub)graph. */
export function membersOf(trace: TraceDoc, node: number): number[] {
  const members = new Set<number>([node]);
  for (const [u, v] of trace.graph.edges) {
    if (u === node) members.add(v);
    if (v === node) members.add(u);
  }
  return [...members].sort((a, b) => a - b);
}

/** All step ids of one layer carrying a formula symbol. */
export function symbolLookup(
  trace: TraceDoc,
  layerIndex: number,
  symbol: string,
): string[] {
  const layer = trace.layers[layerIndex];
  if (!layer) throw new Error(`no layer ${layerIndex}`);
  return layer.steps.filter((s) => s.symbol === symbol).map((s) => s.step_id);
}

export interface Highlight {
  members: number[];
  coefficients: number[];
}

/** Previous-layer nodes feeding `node`, with the recorded factors. */
export function neighborhoodHighlight(
  trace: TraceDoc,
  layerIndex: number,
  node: number,
): Highlight {
  const layer = trace.layers[layerIndex];
  if (!layer) throw new Error(`no layer ${layerIndex}`);
  if (layer.kind === "sage") {
    const sample = findStep(layer, node, "sample");
    if (!sample) throw new Error(`node ${node} not in layer ${layer.name}`);
    const sampled = sample.values.map((v) => Math.trunc(v));
    const members = [...sampled, node].sort((a, b) => a - b);
    const share = sampled.length ? 1 / sampled.length : 0;
    return {
      members,
      coefficients: members.map((m) => (m === node ? 1 : share)),
    };
  }
  if (layer.kind === "gcn" || layer.kind === "gat") {
    const symbol = layer.kind === "gcn" ? "coeff" : "alpha";
    const step = findStep(layer, node, symbol);
    if (!step) throw new Error(`node ${node} not in layer ${layer.name}`);
    return { members: membersOf(trace, node), coefficients: [...step.values] };
  }
  throw new Error(`${layer.name} is not a GNN layer`);
}

/** Ascending distinct stage values of one layer (the reveal schedule). */
export function revealStages(layer: TraceLayer): number[] {
  return [...new Set(layer.steps.map((s) => s.stage_order))].sort(
    (a, b) => a - b,
  );
}

/** Per-node output step (what the level-2 views draw) for a GNN/mlp layer. */
export function nodeOutputs(layer: TraceLayer): Map<number, TraceStep> {
  const out = new Map<number, TraceStep>();
  const symbol =
    layer.kind === "pool" ? "pool" : layer.kind === "dot" ? "dot" : null;
  for (const step of layer.steps) {
    if (symbol !== null) {
      if (step.symbol === symbol) out.set(-1, step);
    } else if (
      step.node_scope !== null &&
      (step.symbol === "activation" || step.symbol === "logits")
    ) {
      out.set(step.node_scope, step);
    }
  }
  return out;
}
