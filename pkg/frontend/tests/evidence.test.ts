import { describe, expect, it } from "vitest";

import {
  clearAll,
  clearNode,
  isContiguous,
  sameEvidence,
  selectRange,
  summarize,
  toggleState,
} from "../src/evidence.js";
import { GRAPH } from "./helpers.js";

const gid = GRAPH.nodes[0];
const weather = GRAPH.nodes[2];

describe("evidence editing", () => {
  it("toggles a state on and off", () => {
    const one = toggleState({}, gid, "[15,30)");
    expect(one).toEqual({ gate_in_dest: ["[15,30)"] });
    const none = toggleState(one, gid, "[15,30)");
    expect(none).toEqual({});
  });

  it("never produces an empty admissible set", () => {
    // Deselecting the last state lifts the constraint instead.
    const one = toggleState({}, weather, "storm");
    const lifted = toggleState(one, weather, "storm");
    expect("weather_dest" in lifted).toBe(false);
  });

  it("keeps selections in state order regardless of click order", () => {
    let ev = toggleState({}, gid, "[30,60)");
    ev = toggleState(ev, gid, "[0,15)");
    expect(ev.gate_in_dest).toEqual(["[0,15)", "[30,60)"]);
  });

  it("selects contiguous ranges (slider semantics)", () => {
    const ev = selectRange({}, gid, 3, 1);
    expect(ev.gate_in_dest).toEqual(["[0,15)", "[15,30)", "[30,60)"]);
    expect(isContiguous(gid, ev.gate_in_dest)).toBe(true);
  });

  it("clamps ranges to the state space", () => {
    const ev = selectRange({}, gid, -3, 99);
    expect(ev.gate_in_dest).toEqual(gid.states);
  });

  it("flags non-contiguous picks for advanced mode", () => {
    let ev = toggleState({}, gid, "(-inf,0)");
    ev = toggleState(ev, gid, "[30,60)");
    expect(isContiguous(gid, ev.gate_in_dest)).toBe(false);
  });

  it("clears one node or everything", () => {
    let ev = selectRange({}, gid, 0, 1);
    ev = toggleState(ev, weather, "clear");
    expect(Object.keys(clearNode(ev, "gate_in_dest"))).toEqual([
      "weather_dest",
    ]);
    expect(clearAll()).toEqual({});
  });

  it("summarizes evidence for legends", () => {
    expect(summarize({})).toBe("no evidence");
    const ev = {
      weather_dest: ["storm"],
      gate_in_dest: ["[15,30)", "[30,60)"],
    };
    expect(summarize(ev)).toBe(
      "gate_in_dest: [15,30), [30,60); weather_dest: storm",
    );
  });

  it("compares evidence structurally", () => {
    const a = { gate_in_dest: ["[0,15)"] };
    expect(sameEvidence(a, { gate_in_dest: ["[0,15)"] })).toBe(true);
    expect(sameEvidence(a, { gate_in_dest: ["[15,30)"] })).toBe(false);
    expect(sameEvidence(a, {})).toBe(false);
  });
});
