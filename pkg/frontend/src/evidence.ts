/** Pure evidence-editing operations.
 *
 * Evidence maps a node to its admissible state labels. A node absent from
 * the map is unconstrained; an explicitly empty set is never produced,
 * because the service rejects it and the spec forbids it.
 */

import type { Evidence, GraphNode } from "./api.js";

export function toggleState(
  evidence: Evidence,
  node: GraphNode,
  state: string,
): Evidence {
  const current = evidence[node.name];
  const next = { ...evidence };
  if (current === undefined) {
    next[node.name] = [state];
    return next;
  }
  if (current.includes(state)) {
    const remaining = current.filter((s) => s !== state);
    if (remaining.length === 0) {
      // Deselecting the last state lifts the constraint entirely rather
      // than creating an empty admissible set.
      delete next[node.name];
    } else {
      next[node.name] = remaining;
    }
    return next;
  }
  next[node.name] = orderedSelection(node, [...current, state]);
  return next;
}

/** Contiguous range selection for binned nodes (slider semantics). */
export function selectRange(
  evidence: Evidence,
  node: GraphNode,
  lowIndex: number,
  highIndex: number,
): Evidence {
  const lo = Math.max(0, Math.min(lowIndex, highIndex));
  const hi = Math.min(node.states.length - 1, Math.max(lowIndex, highIndex));
  const next = { ...evidence };
  next[node.name] = node.states.slice(lo, hi + 1);
  return next;
}

export function clearNode(evidence: Evidence, nodeName: string): Evidence {
  const next = { ...evidence };
  delete next[nodeName];
  return next;
}

export function clearAll(): Evidence {
  return {};
}

function orderedSelection(node: GraphNode, picked: string[]): string[] {
  return node.states.filter((s) => picked.includes(s));
}

export function isContiguous(node: GraphNode, selection: string[]): boolean {
  const indices = selection
    .map((s) => node.states.indexOf(s))
    .sort((a, b) => a - b);
  if (indices.length === 0 || indices[0] < 0) return false;
  return indices[indices.length - 1] - indices[0] === indices.length - 1;
}

/** Human summary used in legends, e.g. "gate_in_dest: [15,30); gdp: yes". */
export function summarize(evidence: Evidence): string {
  const parts = Object.keys(evidence)
    .sort()
    .map((node) => `${node}: ${evidence[node].join(", ")}`);
  return parts.length ? parts.join("; ") : "no evidence";
}

export function sameEvidence(a: Evidence, b: Evidence): boolean {
  const ka = Object.keys(a).sort();
  const kb = Object.keys(b).sort();
  if (ka.length !== kb.length) return false;
  return ka.every(
    (k, i) =>
      k === kb[i] &&
      a[k].length === b[k].length &&
      a[k].every((s, j) => s === b[k][j]),
  );
}
