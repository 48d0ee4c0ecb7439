// Bidirectional math-visualization linking: hovering a formula symbol
// highlights the steps carrying it; hovering a heatmap cell highlights the
// symbol span and requests the cell's provenance arithmetic.

import { symbolLookup } from "../traceQuery.js";
import type { TraceDoc } from "../types.js";

export interface SymbolHoverResult {
  symbol: string;
  stepIds: string[]; // may be empty: the layer's variant lacks the symbol
}

export function hoverFormulaSymbol(
  trace: TraceDoc,
  layerIndex: number,
  symbol: string,
): SymbolHoverResult {
  return { symbol, stepIds: symbolLookup(trace, layerIndex, symbol) };
}

export interface CellHoverResult {
  stepId: string;
  cell: number;
  symbol: string; // the formula span to light up
  wantsProvenance: boolean; // inputs/parameters have no arithmetic to show
}

const NO_PROVENANCE = new Set(["W", "b", "a", "coeff", "sample"]);

export function hoverHeatmapCell(
  trace: TraceDoc,
  layerIndex: number,
  stepId: string,
  cell: number,
): CellHoverResult {
  const layer = trace.layers[layerIndex];
  const step = layer.steps.find((s) => s.step_id === stepId);
  if (!step) throw new Error(`no step ${stepId} in layer ${layerIndex}`);
  const isInput = step.symbol === "x_j" && layerIndex === 0;
  return {
    stepId,
    cell,
    symbol: step.symbol,
    wantsProvenance: !isInput && !NO_PROVENANCE.has(step.symbol),
  };
}
