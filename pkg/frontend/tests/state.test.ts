import { describe, expect, it } from "vitest";

import {
  beginRequest,
  collapseLayer,
  expandLayer,
  hover,
  initialState,
  isStale,
  selectTask,
  selectVariant,
  switchView,
} from "../src/state.js";

describe("view state invariants", () => {
  it("at most one layer is expanded", () => {
    let s = expandLayer(initialState(), 1);
    expect(s.expandedLayer).toBe(1);
    s = expandLayer(s, 3);
    expect(s.expandedLayer).toBe(3);
    expect(collapseLayer(s).expandedLayer).toBeNull();
  });

  it("view switches clear hover but preserve selection and expansion", () => {
    let s = expandLayer(initialState(), 2);
    s = hover(s, { kind: "node", node: 7 });
    const dataset = s.selection.dataset;
    s = switchView(s, "matrix");
    expect(s.hovered).toBeNull();
    expect(s.expandedLayer).toBe(2);
    expect(s.selection.dataset).toBe(dataset);
    expect(s.activeView).toBe("matrix");
  });

  it("switching variant preserves the dataset selection", () => {
    let s = initialState(); // mutag selected
    s = selectVariant(s, "gat");
    expect(s.selection.dataset).toBe("mutag");
    expect(s.selection.variant).toBe("gat");
  });

  it("switching task resets the target and collapses", () => {
    let s = expandLayer(initialState(), 1);
    s = selectTask(s, "link_prediction", "karate");
    expect(s.selection.target).toBeNull();
    expect(s.expandedLayer).toBeNull();
    expect(s.selection.dataset).toBe("karate");
  });

  it("stale request tokens are detected", () => {
    const [afterFirst, first] = beginRequest(initialState());
    const [afterSecond, second] = beginRequest(afterFirst);
    expect(isStale(afterSecond, first)).toBe(true);
    expect(isStale(afterSecond, second)).toBe(false);
  });
});
