/** In-memory stand-in for the what-if service, driven through the real
 * Client so request shapes are exercised too. Behavior mirrors the API
 * contract: 404 unknown model/scenario, 422 bad evidence, 409 impossible
 * evidence; posteriors come from a fixed table, never computed here.
 */

import { Client } from "../src/api.js";
import type { Evidence, ModelGraph, QueryResult } from "../src/api.js";

export const GRAPH: ModelGraph = {
  id: "m1",
  nodes: [
    {
      name: "gate_in_dest",
      parents: ["taxi_out", "taxi_in"],
      states: ["(-inf,0)", "[0,15)", "[15,30)", "[30,60)", "[60,inf)"],
      kind: "binned",
      bins: {
        edges: [0, 15, 30, 60],
        lower_open: true,
        upper_open: true,
        midpoints: [-7.5, 7.5, 22.5, 45, 67.5],
      },
    },
    {
      name: "taxi_out",
      parents: [],
      states: ["(-inf,0)", "[0,15)", "[15,30)", "[30,inf)"],
      kind: "binned",
      bins: {
        edges: [0, 15, 30],
        lower_open: true,
        upper_open: true,
        midpoints: [-7.5, 7.5, 22.5, 37.5],
      },
    },
    {
      name: "weather_dest",
      parents: [],
      states: ["clear", "low_visibility", "storm"],
      kind: "categorical",
    },
  ],
};

export interface FakeService {
  client: Client;
  scenarios: Map<string, Evidence>;
  queries: { evidence: Evidence }[];
  posteriorFor: (evidence: Evidence) => QueryResult;
  failNextWith?: number;
  delayNextMs?: number;
}

function defaultPosterior(evidence: Evidence): QueryResult {
  // Fixed distinct vectors keyed by the evidence summary so tests can tell
  // responses apart; values are data, not computation.
  const key = JSON.stringify(evidence);
  const seeded = Array.from(key).reduce(
    (a, c, i) => (a + c.charCodeAt(0) * (i + 1)) % 9973,
    7,
  );
  const vec = (k: number, shift: number) => {
    const raw = Array.from({ length: k }, (_, i) =>
      ((seeded + shift + i * 13) % 17) + 1,
    );
    const total = raw.reduce((a, b) => a + b, 0);
    return raw.map((v) => v / total);
  };
  return {
    posteriors: {
      gate_in_dest: vec(5, 1),
      taxi_out: vec(4, 2),
      weather_dest: vec(3, 3),
    },
    expected: { gate_in_dest: (seeded % 40) + 1.5, taxi_out: (seeded % 20) + 0.25 },
    evidence_logprob: -1.25,
  };
}

export function fakeService(): FakeService {
  const scenarios = new Map<string, Evidence>();
  const queries: { evidence: Evidence }[] = [];
  const service: FakeService = {
    client: undefined as unknown as Client,
    scenarios,
    queries,
    posteriorFor: defaultPosterior,
  };

  const json = (status: number, body: unknown) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "content-type": "application/json" },
    });

  const handler = async (
    input: RequestInfo | URL,
    init?: RequestInit,
  ): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    if (service.delayNextMs !== undefined) {
      const ms = service.delayNextMs;
      service.delayNextMs = undefined;
      await new Promise((resolve) => setTimeout(resolve, ms));
    }
    if (init?.signal?.aborted) {
      throw new DOMException("aborted", "AbortError");
    }
    if (service.failNextWith !== undefined) {
      const status = service.failNextWith;
      service.failNextWith = undefined;
      return json(status, { error: `injected ${status}` });
    }

    if (url.endsWith("/models") && method === "GET") {
      return json(200, {
        models: [{ id: "m1", config_hash: "x", created: 0, n_scenarios: 0 }],
      });
    }
    if (url.endsWith("/models/m1/graph")) {
      return json(200, GRAPH);
    }
    if (url.endsWith("/models/m1/query") && method === "POST") {
      const evidence = (body.evidence ?? {}) as Evidence;
      for (const [node, states] of Object.entries(evidence)) {
        const known = GRAPH.nodes.find((n) => n.name === node);
        if (!known || states.some((s) => !known.states.includes(s))) {
          return json(422, { error: `unknown node or state for ${node}` });
        }
        if (states.length === 0) {
          return json(422, { error: `empty admissible set for ${node}` });
        }
      }
      queries.push({ evidence });
      return json(200, service.posteriorFor(evidence));
    }
    if (url.endsWith("/models/m1/scenarios") && method === "GET") {
      return json(200, {
        scenarios: Array.from(scenarios, ([id, evidence]) => ({
          id,
          evidence,
        })),
      });
    }
    if (url.endsWith("/models/m1/scenarios") && method === "POST") {
      scenarios.set(body.name, body.evidence ?? {});
      return json(201, { id: body.name, evidence: body.evidence ?? {} });
    }
    if (method === "DELETE") {
      const id = decodeURIComponent(url.split("/").pop()!);
      if (!scenarios.has(id)) return json(404, { error: "unknown scenario" });
      scenarios.delete(id);
      return json(200, { deleted: id });
    }
    if (url.endsWith("/scenarios/compare") && method === "POST") {
      const ids = body.scenarios as string[];
      if (ids.length > 5) return json(422, { error: "too many scenarios" });
      const missing = ids.filter((id) => !scenarios.has(id));
      if (missing.length) {
        return json(404, { error: `unknown scenarios: ${missing.join(",")}` });
      }
      return json(200, {
        comparison: ids.map((id) => ({
          id,
          evidence: scenarios.get(id)!,
          ...service.posteriorFor(scenarios.get(id)!),
        })),
      });
    }
    return json(404, { error: `unhandled ${method} ${url}` });
  };

  service.client = new Client("http://svc", handler as typeof fetch);
  return service;
}
