// Browser entry point: wires the pure view renderers to the DOM and the
// engine service. All model numbers on screen originate from trace and
// provenance payloads; this file only formats and positions them.

import { EngineClient } from "./api.js";
import { STAGE_DURATION_MS, beginRequest, collapseLayer, expandLayer, hover, initialState, isStale, selectTarget, selectTask, selectVariant, switchView, type ViewState } from "./state.js";
import type { CatalogEntry, DatasetInfo, Prediction, Task, TraceDoc, Variant, ViewKind } from "./types.js";
import { renderFlowchart, renderProvenance } from "./views/flowchart.js";
import { renderAdjacency, renderMatrixStack } from "./views/matrix.js";
import { renderNodeLink } from "./views/nodeLink.js";
import { overviewFromSelection, overviewFromTrace } from "./views/overview.js";
import { hoverFormulaSymbol, hoverHeatmapCell } from "./views/mathLink.js";

const SERVICE = (window as { GNNSCOPE_SERVICE?: string }).GNNSCOPE_SERVICE
  ?? "http://127.0.0.1:8000";

const client = new EngineClient(SERVICE);
let state: ViewState = initialState();
let catalog: CatalogEntry[] = [];
let datasets: DatasetInfo[] = [];
let trace: TraceDoc | null = null;
let prediction: Prediction | null = null;
let stageTimer: number | null = null;

const $ = (id: string) => document.getElementById(id)!;

async function boot(): Promise<void> {
  const hints = await fetch("public/onboarding.txt").then((r) => r.text())
    .catch(() => "");
  $("onboarding").textContent = hints;
  [catalog, datasets] = await Promise.all([
    client.listModels(),
    client.listDatasets(),
  ]);
  renderControls();
  renderAll();
}

function currentEntry(): CatalogEntry | undefined {
  return catalog.find(
    (e) => e.variant === state.selection.variant
      && e.task === state.selection.task,
  );
}

function renderControls(): void {
  const variants = [...new Set(catalog.map((e) => e.variant))];
  const tasks = [...new Set(catalog.map((e) => e.task))];
  const variantSelect = $("variant") as HTMLSelectElement;
  const taskSelect = $("task") as HTMLSelectElement;
  variantSelect.innerHTML = variants
    .map((v) => `<option value="${v}">${v.toUpperCase()}</option>`)
    .join("");
  taskSelect.innerHTML = tasks
    .map((t) => `<option value="${t}">${t.replaceAll("_", " ")}</option>`)
    .join("");
  variantSelect.value = state.selection.variant;
  taskSelect.value = state.selection.task;

  variantSelect.onchange = () => {
    state = selectVariant(state, variantSelect.value as Variant);
    syncDatasetForSelection();
    renderAll();
  };
  taskSelect.onchange = () => {
    const task = taskSelect.value as Task;
    const entry = catalog.find(
      (e) => e.variant === state.selection.variant && e.task === task,
    );
    state = selectTask(state, task, entry?.dataset ?? state.selection.dataset);
    renderTargetInput();
    renderAll();
  };
  ($("view-node-link") as HTMLButtonElement).onclick = () => setView("node_link");
  ($("view-matrix") as HTMLButtonElement).onclick = () => setView("matrix");
  ($("predict") as HTMLButtonElement).onclick = () => void runPredict();
  renderTargetInput();
}

function syncDatasetForSelection(): void {
  const entry = currentEntry();
  if (entry && entry.dataset !== state.selection.dataset) {
    state = { ...state, selection: { ...state.selection, dataset: entry.dataset } };
    renderTargetInput();
  }
}

function renderTargetInput(): void {
  const dataset = datasets.find((d) => d.id === state.selection.dataset);
  const holder = $("target-holder");
  const task = state.selection.task;
  const hint = task === "graph_classification"
    ? `graph index 0..${(dataset?.graph_count ?? 1) - 1}`
    : task === "node_classification"
      ? "node index"
      : "edge as a,b";
  holder.innerHTML = `<label>dataset: <b>${state.selection.dataset}</b></label>
    <input id="target" placeholder="${hint}" value="0">`;
}

function setView(view: ViewKind): void {
  state = switchView(state, view);
  renderAll();
}

async function runPredict(): Promise<void> {
  const raw = ($("target") as HTMLInputElement).value.trim();
  let target: number | number[] | null;
  if (state.selection.task === "link_prediction") {
    target = raw.split(",").map((x) => parseInt(x, 10));
  } else {
    target = parseInt(raw || "0", 10);
  }
  const [next, token] = beginRequest(state);
  state = next;
  $("predict").classList.remove("flash");
  try {
    const body = await client.predict({
      model: state.selection.variant,
      task: state.selection.task,
      dataset: state.selection.dataset,
      target,
      seed: 0,
    });
    const doc = await client.trace(body.trace_id);
    if (isStale(state, token)) return; // a newer request superseded this one
    prediction = body.prediction;
    trace = doc;
    state = selectTarget(collapseLayer(state), body.prediction.target as never);
    renderAll();
  } catch (err) {
    $("status").textContent = String(err);
  }
}

function renderAll(): void {
  renderOverviewStrip();
  renderPrediction();
  renderMainView();
  renderExpanded();
}

function renderOverviewStrip(): void {
  const blocks = trace
    ? overviewFromTrace(trace)
    : overviewFromSelection(state.selection.variant, state.selection.task);
  $("overview").innerHTML = blocks
    .map((b) => {
      const expanded = b.layerIndex !== null
        && b.layerIndex === state.expandedLayer;
      return `<span class="block kind-${b.kind}${expanded ? " active" : ""}"
        data-layer="${b.layerIndex ?? ""}">${b.label}</span>`;
    })
    .join("<span class='arrow'>→</span>");
  for (const el of $("overview").querySelectorAll<HTMLElement>(".block")) {
    el.onclick = () => {
      const layer = el.dataset.layer;
      if (layer === "" || layer === undefined) return;
      state = expandLayer(state, parseInt(layer, 10));
      startStagedReveal();
      renderAll();
    };
  }
}

function renderPrediction(): void {
  if (!prediction) {
    $("status").textContent =
      "Pick a model and press “Click to Predict” to begin.";
    return;
  }
  const probs = prediction.probabilities
    .map((p) => p.toFixed(4))
    .join(", ");
  $("status").textContent =
    `task ${prediction.task} | target ${JSON.stringify(prediction.target)} | `
    + `predicted class ${prediction.predicted_class} | p = [${probs}]`;
}

function renderMainView(): void {
  const host = $("canvas");
  if (!trace) {
    host.innerHTML = "<p class='empty'>No trace yet.</p>";
    return;
  }
  const hoveredNode = state.hovered?.kind === "node"
    ? state.hovered.node ?? null : null;
  const hoveredLayer = hoveredNode !== null
    ? latestGnnLayer(trace) : null;

  if (state.activeView === "node_link") {
    const columns = renderNodeLink(trace, hoveredNode, hoveredLayer);
    host.innerHTML = columns
      .map((col) => {
        const dots = col.positions
          .map((p) =>
            `<circle cx="${(p.x + 140).toFixed(1)}" cy="${(p.y + 140).toFixed(1)}"
               r="5" data-node="${p.node}" class="node"></circle>`)
          .join("");
        const curves = col.highlightCurves
          .map((c) => {
            const a = col.positions[c.source];
            const b = col.positions[c.target];
            return `<line x1="${(a.x + 140).toFixed(1)}" y1="${(a.y + 140).toFixed(1)}"
              x2="${(b.x + 140).toFixed(1)}" y2="${(b.y + 140).toFixed(1)}"
              stroke="${c.color}" stroke-width="${c.width.toFixed(2)}"></line>`;
          })
          .join("");
        const feature = col.hoveredFeature
          ? `<div class="strip">${col.hoveredFeature
            .map((cell) => `<span class="cell" style="background:${cell.color}"
                 title="${cell.value}"></span>`).join("")}</div>`
          : "";
        return `<figure><figcaption>${col.name}</figcaption>
          <svg viewBox="0 0 280 280">${curves}${dots}</svg>${feature}</figure>`;
      })
      .join("");
    for (const el of host.querySelectorAll<SVGElement>(".node")) {
      el.addEventListener("mouseenter", () => {
        state = hover(state, { kind: "node", node: Number(el.dataset.node) });
        renderMainView();
      });
    }
  } else {
    const adjacency = renderAdjacency(trace);
    const stack = renderMatrixStack(trace, hoveredNode, hoveredLayer);
    const adjacencyCells = adjacency.ones
      .map(([r, c]) =>
        `<rect x="${c * 4}" y="${r * 4}" width="4" height="4"></rect>`)
      .join("");
    const matrices = stack
      .map((m) => `<figure><figcaption>${m.name}</figcaption><div>
        ${m.rows.map((row) => `<div class="row${row.highlighted ? " hl" : ""}"
            data-node="${row.node}">${row.cells
          .map((cell) => `<span class="cell" style="background:${cell.color}"
               title="${cell.value}"></span>`).join("")}</div>`).join("")}
        </div></figure>`)
      .join("");
    host.innerHTML = `<figure><figcaption>Adjacency</figcaption>
      <svg viewBox="0 0 ${adjacency.size * 4} ${adjacency.size * 4}"
        class="adj">${adjacencyCells}</svg></figure>${matrices}`;
    for (const el of host.querySelectorAll<HTMLElement>(".row")) {
      el.addEventListener("mouseenter", () => {
        state = hover(state, { kind: "node", node: Number(el.dataset.node) });
        renderMainView();
      });
    }
  }
}

function latestGnnLayer(doc: TraceDoc): number {
  let last = 0;
  doc.layers.forEach((layer, i) => {
    if (layer.kind === "gcn" || layer.kind === "gat" || layer.kind === "sage") {
      last = i;
    }
  });
  return last;
}

function startStagedReveal(): void {
  if (stageTimer !== null) window.clearInterval(stageTimer);
  state = { ...state, animationStage: 0 };
  stageTimer = window.setInterval(() => {
    if (!trace || state.expandedLayer === null) return;
    const view = renderFlowchart(trace, state.expandedLayer,
      state.animationStage);
    if (state.animationStage >= view.stages.length - 1) {
      window.clearInterval(stageTimer!);
      stageTimer = null;
      return;
    }
    state = { ...state, animationStage: state.animationStage + 1 };
    renderExpanded();
  }, STAGE_DURATION_MS);
}

function renderExpanded(): void {
  const host = $("flowchart");
  if (!trace || state.expandedLayer === null) {
    host.innerHTML = "";
    return;
  }
  const focusNode = typeof state.selection.target === "number"
    ? state.selection.target : null;
  const view = renderFlowchart(trace, state.expandedLayer,
    state.animationStage, focusNode);
  const formulaHtml = view.formulas
    .map((formula) => `<p class="formula">${formula
      .map((span) => span.symbol
        ? `<span class="sym" data-symbol="${span.symbol}">${span.text}</span>`
        : span.text)
      .join("")}</p>`)
    .join("");
  const heatmaps = view.heatmaps
    .filter((h) => h.revealed)
    .map((h) => `<div class="step" data-step="${h.stepId}">
      <small>${h.symbol}${h.nodeScope !== null ? ` (node ${h.nodeScope})` : ""}</small>
      <div class="strip">${h.cells
        .map((cell, i) => `<span class="cell" data-step="${h.stepId}"
             data-cell="${i}" style="background:${cell.color}"
             title="${cell.value}"></span>`).join("")}</div></div>`)
    .join("");
  host.innerHTML = `<h3>${view.layerName}</h3>${formulaHtml}
    <div class="steps">${heatmaps}</div>
    <div id="provenance" class="popup"></div>
    <button id="collapse">collapse</button>`;

  ($("collapse") as HTMLButtonElement).onclick = () => {
    state = collapseLayer(state);
    renderAll();
  };
  for (const el of host.querySelectorAll<HTMLElement>(".sym")) {
    el.addEventListener("mouseenter", () => {
      const result = hoverFormulaSymbol(trace!, state.expandedLayer!,
        el.dataset.symbol!);
      for (const step of host.querySelectorAll<HTMLElement>(".step")) {
        step.classList.toggle("hl",
          result.stepIds.includes(step.dataset.step!));
      }
    });
  }
  for (const el of host.querySelectorAll<HTMLElement>(".cell")) {
    el.addEventListener("mouseenter", () => {
      void showProvenance(el.dataset.step!, Number(el.dataset.cell));
    });
  }
}

async function showProvenance(stepId: string, cell: number): Promise<void> {
  if (!trace || state.expandedLayer === null) return;
  const info = hoverHeatmapCell(trace, state.expandedLayer, stepId, cell);
  if (!info.wantsProvenance) {
    $("provenance").textContent = `${info.symbol}: input/parameter value`;
    return;
  }
  const payload = await client.provenance(trace.trace_id, stepId, cell);
  const view = renderProvenance(trace, payload);
  $("provenance").innerHTML = `<b>${view.opKind}</b>
    <span class="expr">${view.expression}</span>`;
}

void boot();
