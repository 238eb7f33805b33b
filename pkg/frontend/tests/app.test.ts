import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { QueryController, saveAndReload } from "../src/app.js";
import { barValues } from "../src/charts.js";
import { comparisonViewHtml } from "../src/views.js";
import { round3 } from "../src/charts.js";
import { GRAPH, fakeService } from "./helpers.js";
import type { ViewState } from "../src/app.js";

function controllerWith(svc: ReturnType<typeof fakeService>) {
  const renders: ViewState[] = [];
  const controller = new QueryController(
    svc.client,
    "m1",
    (state) => renders.push({ ...state, evidence: { ...state.evidence } }),
    150,
  );
  return { controller, renders };
}

describe("query controller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("debounces rapid edits into one query", async () => {
    const svc = fakeService();
    const { controller } = controllerWith(svc);
    controller.setEvidence({ weather_dest: ["clear"] });
    await vi.advanceTimersByTimeAsync(60);
    controller.setEvidence({ weather_dest: ["storm"] });
    await vi.advanceTimersByTimeAsync(60);
    controller.setEvidence({ weather_dest: ["low_visibility"] });
    await vi.advanceTimersByTimeAsync(400);
    expect(svc.queries.length).toBe(1);
    expect(svc.queries[0].evidence).toEqual({
      weather_dest: ["low_visibility"],
    });
  });

  it("keeps the last valid posterior and warns on impossible evidence", async () => {
    const svc = fakeService();
    const { controller } = controllerWith(svc);
    controller.setEvidence({ weather_dest: ["storm"] });
    await vi.advanceTimersByTimeAsync(400);
    const good = controller.state.result;
    expect(good).not.toBeNull();

    svc.failNextWith = 409;
    controller.setEvidence({ weather_dest: ["clear"] });
    await vi.advanceTimersByTimeAsync(400);
    expect(controller.state.result).toBe(good);
    expect(controller.state.warning).toMatch(/probability zero/);

    // The next consistent edit clears the warning.
    controller.setEvidence({ weather_dest: ["low_visibility"] });
    await vi.advanceTimersByTimeAsync(400);
    expect(controller.state.warning).toBeNull();
  });

  it("ignores superseded responses", async () => {
    const svc = fakeService();
    const { controller } = controllerWith(svc);
    svc.delayNextMs = 500;  // first query resolves slowly
    controller.setEvidence({ weather_dest: ["clear"] });
    await vi.advanceTimersByTimeAsync(200);
    controller.setEvidence({ weather_dest: ["storm"] });
    await vi.advanceTimersByTimeAsync(2000);
    const want = svc.posteriorFor({ weather_dest: ["storm"] });
    expect(controller.state.result?.posteriors.gate_in_dest).toEqual(
      want.posteriors.gate_in_dest,
    );
  });

  it("reports pending state around the query", async () => {
    const svc = fakeService();
    const { controller, renders } = controllerWith(svc);
    controller.setEvidence({});
    expect(renders.at(-1)?.pending).toBe(true);
    await vi.advanceTimersByTimeAsync(400);
    expect(renders.at(-1)?.pending).toBe(false);
  });
});

describe("scenario round trip", () => {
  it("saving then reloading reproduces the evidence exactly", async () => {
    const svc = fakeService();
    const evidence = {
      gate_in_dest: ["[15,30)", "[30,60)"],
      weather_dest: ["storm"],
    };
    const back = await saveAndReload(svc.client, "m1", "rush-hour", evidence);
    expect(back).toEqual(evidence);

    // And the reloaded evidence queries identically.
    const direct = await svc.client.query("m1", evidence);
    const reloaded = await svc.client.query("m1", back);
    expect(reloaded).toEqual(direct);
  });

  it("three-scenario comparison renders the API posteriors at 3 decimals", async () => {
    const svc = fakeService();
    const defs: [string, Record<string, string[]>][] = [
      ["light", { gate_in_dest: ["[15,30)"] }],
      ["medium", { gate_in_dest: ["[30,60)"] }],
      ["heavy", { gate_in_dest: ["[60,inf)"] }],
    ];
    for (const [name, ev] of defs) {
      await svc.client.saveScenario("m1", name, ev);
    }
    const resp = await svc.client.compare("m1", defs.map(([n]) => n));
    const html = comparisonViewHtml(GRAPH, resp.comparison);
    const values = barValues(html);
    for (const entry of resp.comparison) {
      const gid = entry.posteriors.gate_in_dest.map(round3);
      expect(values[entry.id].slice(0, gid.length)).toEqual(gid);
    }
    // Three distinct posterior groups.
    expect(values.light).not.toEqual(values.medium);
    expect(values.medium).not.toEqual(values.heavy);
  });

  it("comparing a deleted scenario is a 404 the app surfaces as a notice", async () => {
    const svc = fakeService();
    await svc.client.saveScenario("m1", "doomed", {});
    await svc.client.deleteScenario("m1", "doomed");
    await expect(svc.client.compare("m1", ["doomed"])).rejects.toMatchObject({
      status: 404,
    });
  });
});
