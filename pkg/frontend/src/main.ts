/** Browser bootstrap: model picker, evidence editor wiring, scenario
 * save/compare controls. All rendering goes through views.ts so the DOM
 * layer stays a thin shell.
 */

import { ApiError, Client } from "./api.js";
import type { Evidence, ModelGraph } from "./api.js";
import { QueryController } from "./app.js";
import { clearAll, selectRange, toggleState } from "./evidence.js";
import {
  comparisonViewHtml,
  evidenceEditorHtml,
  scenarioViewHtml,
} from "./views.js";

const BASE_URL =
  new URLSearchParams(window.location.search).get("api") ??
  window.location.origin;

const client = new Client(BASE_URL);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function start(): Promise<void> {
  const models = await client.listModels();
  const picker = el("model-picker") as HTMLSelectElement;
  picker.innerHTML = models.models
    .map((m) => `<option value="${m.id}">${m.id}</option>`)
    .join("");
  if (models.models.length === 0) {
    el("scenario-view").textContent =
      "no models loaded; upload one via POST /models";
    return;
  }
  picker.onchange = () => void openModel(picker.value);
  await openModel(models.models[0].id);
}

async function openModel(modelId: string): Promise<void> {
  const graph = await client.graph(modelId);
  const controller = new QueryController(client, modelId, (state) => {
    el("evidence-editor").innerHTML = evidenceEditorHtml(
      graph,
      state.evidence,
    );
    wireEditor(graph, controller);
    if (state.result) {
      el("scenario-view").innerHTML = scenarioViewHtml(
        graph,
        state.evidence,
        state.result,
        state.warning ?? undefined,
      );
    }
    el("status").textContent = state.pending ? "querying..." : "";
  });

  el("clear-evidence").onclick = () => controller.setEvidence(clearAll());
  wireScenarioControls(graph, modelId, controller);
  await controller.refresh();
}

function wireEditor(graph: ModelGraph, controller: QueryController): void {
  const editor = el("evidence-editor");
  editor.querySelectorAll("input[type=checkbox]").forEach((box) => {
    (box as HTMLInputElement).onchange = () => {
      const input = box as HTMLInputElement;
      const node = graph.nodes.find(
        (n) => n.name === input.dataset.node,
      );
      if (!node) return;
      controller.setEvidence(
        toggleState(controller.state.evidence, node, input.dataset.state!),
      );
    };
  });
  editor.querySelectorAll(".range-hint").forEach((hint) => {
    (hint as HTMLElement).onclick = () => {
      const node = graph.nodes.find(
        (n) => n.name === (hint as HTMLElement).dataset.node,
      );
      if (!node) return;
      const raw = window.prompt(
        `${node.name}: range as lowIndex-highIndex over ` +
          node.states.map((s, i) => `${i}:${s}`).join(" "),
      );
      const m = raw?.match(/^(\d+)\s*-\s*(\d+)$/);
      if (!m) return;
      controller.setEvidence(
        selectRange(
          controller.state.evidence,
          node,
          Number(m[1]),
          Number(m[2]),
        ),
      );
    };
  });
}

function wireScenarioControls(
  graph: ModelGraph,
  modelId: string,
  controller: QueryController,
): void {
  el("save-scenario").onclick = async () => {
    const name = (el("scenario-name") as HTMLInputElement).value.trim();
    if (!name) return;
    await client.saveScenario(modelId, name, controller.state.evidence);
    await renderScenarioList(graph, modelId, controller);
  };
  void renderScenarioList(graph, modelId, controller);
}

async function renderScenarioList(
  graph: ModelGraph,
  modelId: string,
  controller: QueryController,
): Promise<void> {
  const listing = await client.listScenarios(modelId);
  const list = el("scenario-list");
  list.innerHTML = listing.scenarios
    .map(
      (s) =>
        `<li><label><input type="checkbox" class="compare-pick" ` +
        `value="${s.id}"/>${s.id}</label> ` +
        `<button data-load="${s.id}">load</button> ` +
        `<button data-del="${s.id}">delete</button></li>`,
    )
    .join("");
  list.querySelectorAll("button[data-load]").forEach((btn) => {
    (btn as HTMLButtonElement).onclick = () => {
      const id = (btn as HTMLButtonElement).dataset.load!;
      const found = listing.scenarios.find((s) => s.id === id);
      if (found) controller.setEvidence(found.evidence as Evidence);
    };
  });
  list.querySelectorAll("button[data-del]").forEach((btn) => {
    (btn as HTMLButtonElement).onclick = async () => {
      await client.deleteScenario(
        modelId,
        (btn as HTMLButtonElement).dataset.del!,
      );
      await renderScenarioList(graph, modelId, controller);
    };
  });
  el("compare-btn").onclick = async () => {
    const picked = Array.from(
      list.querySelectorAll<HTMLInputElement>(".compare-pick:checked"),
    ).map((b) => b.value);
    if (picked.length === 0) return;
    try {
      const result = await client.compare(modelId, picked.slice(0, 5));
      el("compare-view").innerHTML = comparisonViewHtml(
        graph,
        result.comparison,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        // A picked scenario vanished; refresh and note it.
        await renderScenarioList(graph, modelId, controller);
        el("compare-view").innerHTML = comparisonViewHtml(graph, [],
          "a selected scenario was deleted and has been removed");
      } else {
        throw err;
      }
    }
  };
}

void start();
