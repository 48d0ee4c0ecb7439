// Click-to-expand layer flowchart: heatmaps for inputs, parameters,
// intermediates, and outputs, connected by curves whose icons mark the
// computation kind. Reveal follows stage_order; hovering a cell fetches
// its provenance and renders the arithmetic with heatmap-matched colors.

import { curveWidth, makeScale, type ColorScale } from "../colors.js";
import { formulasForLayer, type Formula } from "../formulas.js";
import { revealStages, stepById } from "../traceQuery.js";
import type { ProvenancePayload, TraceDoc, TraceLayer } from "../types.js";
import type { HeatCell } from "./nodeLink.js";

export interface StepHeatmap {
  stepId: string;
  symbol: string;
  role: string;
  nodeScope: number | null;
  shape: number[];
  cells: HeatCell[];
  stage: number;
  revealed: boolean;
}

export interface FlowCurve {
  source: number;
  target: number | null;
  coefficient: number;
  width: number;
  icon: "none" | "matmul" | "sample" | "pool" | "dot";
}

export interface FlowchartView {
  layerName: string;
  kind: string;
  formulas: Formula[];
  stages: number[];
  visibleStage: number;
  heatmaps: StepHeatmap[];
  curves: FlowCurve[];
  fadedLayers: string[]; // non-selected layers, shown at reduced opacity
}

export function renderFlowchart(
  trace: TraceDoc,
  layerIndex: number,
  animationStage: number,
  scopeNode: number | null = null,
): FlowchartView {
  const layer = trace.layers[layerIndex];
  if (!layer) throw new Error(`no layer ${layerIndex}`);
  const stages = revealStages(layer);
  const visible = stages.slice(0, animationStage + 1);
  const visibleMax = visible.length ? visible[visible.length - 1] : -1;

  const values: number[] = [];
  for (const step of layer.steps) values.push(...step.values);
  const scale = makeScale(values);

  const heatmaps: StepHeatmap[] = layer.steps
    .filter((s) => scopeNode === null || s.node_scope === null
      || s.node_scope === scopeNode || s.symbol === "x_j" || s.symbol === "Wx")
    .map((step) => ({
      stepId: step.step_id,
      symbol: step.symbol,
      role: step.role,
      nodeScope: step.node_scope,
      shape: step.shape,
      cells: step.values.map((v) => ({ value: v, color: scale.toColor(v) })),
      stage: step.stage_order,
      revealed: step.stage_order <= visibleMax,
    }));

  const curves: FlowCurve[] = layer.edge_curves
    .filter((c) => scopeNode === null || c.target === scopeNode
      || c.target === null)
    .map((c) => ({
      source: c.source,
      target: c.target,
      coefficient: c.coefficient,
      width: curveWidth(c.coefficient),
      icon: c.icon,
    }));

  return {
    layerName: layer.name,
    kind: layer.kind,
    formulas: formulasForLayer(layer.formula_id),
    stages,
    visibleStage: Math.min(animationStage, stages.length - 1),
    heatmaps,
    curves,
    fadedLayers: trace.layers
      .filter((_, i) => i !== layerIndex)
      .map((l) => l.name),
  };
}

export interface ProvenanceTermView {
  stepId: string;
  cell: number;
  coefficient: number;
  value: number;
  color: string; // same encoding as the heatmap the value came from
}

export interface ProvenanceView {
  stepId: string;
  cell: number;
  opKind: string;
  result: number;
  resultColor: string;
  terms: ProvenanceTermView[];
  expression: string;
}

/**
 * Render the per-cell arithmetic pop-up. Every number is lifted verbatim
 * from the trace/provenance payloads; the expression merely formats them.
 */
export function renderProvenance(
  trace: TraceDoc,
  payload: ProvenancePayload,
  scale?: ColorScale,
): ProvenanceView {
  const target = stepById(trace, payload.target.step_id);
  const layerValues: number[] = [];
  for (const step of trace.layers[layerIndexOf(trace, target.step_id)].steps) {
    layerValues.push(...step.values);
  }
  const colors = scale ?? makeScale(layerValues);

  const terms: ProvenanceTermView[] = payload.terms.map((term) => {
    const value = stepById(trace, term.step_id).values[term.cell];
    return {
      stepId: term.step_id,
      cell: term.cell,
      coefficient: term.coefficient,
      value,
      color: colors.toColor(value),
    };
  });
  const result = target.values[payload.target.cell];
  return {
    stepId: payload.target.step_id,
    cell: payload.target.cell,
    opKind: payload.op_kind,
    result,
    resultColor: colors.toColor(result),
    terms,
    expression: formatExpression(payload.op_kind, terms, result),
  };
}

function layerIndexOf(trace: TraceDoc, stepId: string): number {
  for (let i = 0; i < trace.layers.length; i++) {
    if (trace.layers[i].steps.some((s) => s.step_id === stepId)) return i;
  }
  throw new Error(`no layer holds ${stepId}`);
}

const SHOW = (v: number) => Number(v.toPrecision(4)).toString();

function formatExpression(
  opKind: string,
  terms: ProvenanceTermView[],
  result: number,
): string {
  if (opKind === "max_zero") {
    return `max(0, ${SHOW(terms[0].value)}) = ${SHOW(result)}`;
  }
  if (opKind === "softmax_cell") {
    const parts = terms.map((t) => `exp(${SHOW(t.value)})`);
    return `${parts[0]} / (${parts.join(" + ")}) = ${SHOW(result)}`;
  }
  if (opKind === "add") {
    return `${terms.map((t) => SHOW(t.value)).join(" + ")} = ${SHOW(result)}`;
  }
  const products = terms.map(
    (t) => `${SHOW(t.coefficient)}·${SHOW(t.value)}`,
  );
  const body = products.length ? products.join(" + ") : "0";
  return `${body} = ${SHOW(result)}`;
}

/** Cell order for the "all dimensions" animation of one heatmap. */
export function allDimensionsOrder(layer: TraceLayer, stepId: string): number[] {
  const step = layer.steps.find((s) => s.step_id === stepId);
  if (!step) throw new Error(`no step ${stepId}`);
  return step.values.map((_, i) => i);
}
