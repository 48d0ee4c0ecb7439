import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type {
  CatalogEntry,
  PredictResponse,
  ProvenancePayload,
  TraceDoc,
} from "../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));

export const FIXTURE_NAMES = [
  "gcn_node_karate",
  "gat_node_karate",
  "gat_link_karate",
  "gcn_graph_mutag",
  "sage_node_twitch",
] as const;

export type FixtureName = (typeof FIXTURE_NAMES)[number];

function read(name: string): unknown {
  return JSON.parse(readFileSync(join(HERE, "fixtures", name), "utf-8"));
}

export const loadTrace = (name: FixtureName) =>
  read(`trace_${name}.json`) as TraceDoc;

export const loadHighlights = (name: FixtureName) =>
  read(`highlights_${name}.json`) as Record<
    string,
    Record<string, { members: number[]; coefficients: number[] }>
  >;

export const loadPrediction = (name: FixtureName) =>
  read(`prediction_${name}.json`) as PredictResponse;

export const loadProvenance = (name: FixtureName) =>
  read(`provenance_${name}.json`) as ProvenancePayload[];

export const loadCatalog = () => read("catalog.json") as CatalogEntry[];

/** Every numeric value present in a trace payload (the allowed sources). */
export function payloadNumbers(trace: TraceDoc): Set<number> {
  const out = new Set<number>();
  for (const layer of trace.layers) {
    for (const step of layer.steps) {
      for (const v of step.values) out.add(v);
    }
    for (const curve of layer.edge_curves) out.add(curve.coefficient);
  }
  return out;
}
