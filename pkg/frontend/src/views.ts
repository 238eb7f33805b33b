/** HTML composition for the single-scenario view and the comparison view.
 *
 * Everything is stateless string rendering over API payloads; the app layer
 * owns fetching and event wiring.
 */

import type {
  ComparisonEntry,
  Evidence,
  GraphNode,
  ModelGraph,
  QueryResult,
} from "./api.js";
import { SCENARIO_COLORS, barGroupSvg, expectedBadge, round3 } from "./charts.js";
import { summarize } from "./evidence.js";

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function evidenceEditorHtml(
  graph: ModelGraph,
  evidence: Evidence,
): string {
  const sections = graph.nodes.map((node) => {
    const picked = evidence[node.name] ?? [];
    const boxes = node.states
      .map((state, i) => {
        const checked = picked.includes(state) ? " checked" : "";
        return (
          `<label class="state-toggle"><input type="checkbox" ` +
          `data-node="${esc(node.name)}" data-state="${esc(state)}" ` +
          `data-index="${i}"${checked}/>${esc(state)}</label>`
        );
      })
      .join("");
    const slider =
      node.kind === "binned"
        ? `<div class="range-hint" data-node="${esc(node.name)}">` +
          `drag to select a contiguous range</div>`
        : "";
    return (
      `<fieldset class="node-editor" data-node="${esc(node.name)}">` +
      `<legend>${esc(node.name)} (${node.kind})</legend>${boxes}${slider}` +
      `</fieldset>`
    );
  });
  return `<div class="evidence-editor">${sections.join("")}</div>`;
}

export function scenarioViewHtml(
  graph: ModelGraph,
  evidence: Evidence,
  result: QueryResult,
  warning?: string,
): string {
  const head =
    `<div class="scenario-summary">${esc(summarize(evidence))}</div>` +
    (warning
      ? `<div class="warning" role="alert">${esc(warning)}</div>`
      : "");
  const charts = graph.nodes
    .filter((n) => result.posteriors[n.name] !== undefined)
    .map((node) => nodeChartHtml(node, [
      { label: "current", color: SCENARIO_COLORS[0],
        probs: result.posteriors[node.name] },
    ], result.expected[node.name]))
    .join("");
  return `<div class="scenario-view">${head}${charts}</div>`;
}

function nodeChartHtml(
  node: GraphNode,
  series: { label: string; color: string; probs: number[] }[],
  expected?: number,
): string {
  const badge =
    expected === undefined ? "" : expectedBadge(node.name, expected);
  return (
    `<div class="node-chart" data-node="${esc(node.name)}">` +
    `<h4>${esc(node.name)}</h4>${badge}` +
    barGroupSvg(node.states, series) +
    `</div>`
  );
}

export function comparisonViewHtml(
  graph: ModelGraph,
  comparison: ComparisonEntry[],
  removedNotice?: string,
): string {
  const legend = comparison
    .map(
      (entry, i) =>
        `<li><span class="swatch" style="background:${
          SCENARIO_COLORS[i % SCENARIO_COLORS.length]
        }"></span><b>${esc(entry.id)}</b>: ${esc(summarize(entry.evidence))}</li>`,
    )
    .join("");
  const notice = removedNotice
    ? `<div class="notice">${esc(removedNotice)}</div>`
    : "";
  const charts = graph.nodes
    .filter((n) => comparison.every((c) => c.posteriors[n.name] !== undefined))
    .map((node) =>
      nodeChartHtml(
        node,
        comparison.map((entry, i) => ({
          label: entry.id,
          color: SCENARIO_COLORS[i % SCENARIO_COLORS.length],
          probs: entry.posteriors[node.name],
        })),
      ),
    )
    .join("");
  return (
    `<div class="comparison-view">${notice}<ul class="legend">${legend}</ul>` +
    `${charts}${expectedTableHtml(graph, comparison)}</div>`
  );
}

/** Expected-value table: one row per binned node, one column per scenario. */
export function expectedTableHtml(
  graph: ModelGraph,
  comparison: ComparisonEntry[],
): string {
  const binned = graph.nodes.filter((n) => n.kind === "binned");
  const header = comparison.map((c) => `<th>${esc(c.id)}</th>`).join("");
  const rows = binned
    .map((node) => {
      const cells = comparison
        .map((c) => {
          const v = c.expected[node.name];
          return `<td data-node="${esc(node.name)}" data-scenario="${esc(
            c.id,
          )}">${v === undefined ? "" : round3(v).toFixed(1)}</td>`;
        })
        .join("");
      return `<tr><th>${esc(node.name)}</th>${cells}</tr>`;
    })
    .join("");
  return (
    `<table class="expected-table"><thead><tr><th>node</th>${header}</tr>` +
    `</thead><tbody>${rows}</tbody></table>`
  );
}
