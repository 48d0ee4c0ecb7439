// View state and its transitions. Invariants enforced here: at most one
// expanded layer, hover cleared on view switches, dataset selection
// preserved across variant/task changes, stale responses dropped by token.

import type { HoverEntity, Task, Variant, ViewKind } from "./types.js";

export interface Selection {
  variant: Variant;
  task: Task;
  dataset: string;
  target: number | number[] | "graph" | null;
}

export interface ViewState {
  selection: Selection;
  activeView: ViewKind;
  expandedLayer: number | null;
  hovered: HoverEntity | null;
  animationStage: number;
  requestToken: number;
}

export const STAGE_DURATION_MS = 400; // ordering is contractual; timing is ours

export function initialState(): ViewState {
  return {
    selection: {
      variant: "gcn",
      task: "graph_classification",
      dataset: "mutag",
      target: null,
    },
    activeView: "node_link",
    expandedLayer: null,
    hovered: null,
    animationStage: 0,
    requestToken: 0,
  };
}

export function selectVariant(state: ViewState, variant: Variant): ViewState {
  // switching variant keeps the dataset (and task) selection
  return {
    ...state,
    selection: { ...state.selection, variant },
    expandedLayer: null,
    animationStage: 0,
  };
}

export function selectTask(
  state: ViewState,
  task: Task,
  dataset: string,
): ViewState {
  return {
    ...state,
    selection: { ...state.selection, task, dataset, target: null },
    expandedLayer: null,
    animationStage: 0,
  };
}

export function selectTarget(
  state: ViewState,
  target: Selection["target"],
): ViewState {
  return { ...state, selection: { ...state.selection, target } };
}

export function switchView(state: ViewState, view: ViewKind): ViewState {
  // hover state never survives a view switch; selection and expansion do
  return { ...state, activeView: view, hovered: null };
}

export function expandLayer(state: ViewState, layer: number): ViewState {
  return { ...state, expandedLayer: layer, animationStage: 0 };
}

export function collapseLayer(state: ViewState): ViewState {
  return { ...state, expandedLayer: null, animationStage: 0 };
}

export function hover(state: ViewState, entity: HoverEntity | null): ViewState {
  return { ...state, hovered: entity };
}

export function advanceStage(state: ViewState, maxStage: number): ViewState {
  return {
    ...state,
    animationStage: Math.min(state.animationStage + 1, maxStage),
  };
}

export function beginRequest(state: ViewState): [ViewState, number] {
  const token = state.requestToken + 1;
  return [{ ...state, requestToken: token }, token];
}

export function isStale(state: ViewState, token: number): boolean {
  return token !== state.requestToken;
}
