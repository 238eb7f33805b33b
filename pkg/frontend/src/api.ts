/** Typed client for the delay-propagation what-if service.
 *
 * The UI performs no probability math: every number it renders comes out of
 * these response payloads untouched (display rounding only).
 */

export interface BinInfo {
  edges: number[];
  lower_open: boolean;
  upper_open: boolean;
  midpoints: number[];
}

export interface GraphNode {
  name: string;
  parents: string[];
  states: string[];
  kind: "binned" | "categorical";
  bins?: BinInfo;
}

export interface ModelGraph {
  id: string;
  nodes: GraphNode[];
}

export interface ModelSummary {
  id: string;
  config_hash: string;
  created: number;
  n_scenarios: number;
}

export type Evidence = Record<string, string[]>;

export interface QueryResult {
  posteriors: Record<string, number[]>;
  expected: Record<string, number>;
  evidence_logprob: number;
}

export interface ScenarioEntry {
  id: string;
  evidence: Evidence;
}

export interface ComparisonEntry extends ScenarioEntry, QueryResult {}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let message = resp.statusText;
  try {
    const body = (await resp.json()) as { error?: string };
    if (body.error) message = body.error;
  } catch {
    /* non-JSON error body */
  }
  return new ApiError(resp.status, message);
}

export class Client {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  private async send<T>(
    method: string,
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
      signal,
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  listModels(): Promise<{ models: ModelSummary[] }> {
    return this.get("/models");
  }

  graph(modelId: string): Promise<ModelGraph> {
    return this.get(`/models/${modelId}/graph`);
  }

  query(
    modelId: string,
    evidence: Evidence,
    signal?: AbortSignal,
  ): Promise<QueryResult> {
    return this.send("POST", `/models/${modelId}/query`, { evidence }, signal);
  }

  listScenarios(modelId: string): Promise<{ scenarios: ScenarioEntry[] }> {
    return this.get(`/models/${modelId}/scenarios`);
  }

  saveScenario(
    modelId: string,
    name: string,
    evidence: Evidence,
  ): Promise<ScenarioEntry> {
    return this.send("POST", `/models/${modelId}/scenarios`, {
      name,
      evidence,
    });
  }

  deleteScenario(modelId: string, scenarioId: string): Promise<unknown> {
    return this.send(
      "DELETE",
      `/models/${modelId}/scenarios/${encodeURIComponent(scenarioId)}`,
    );
  }

  compare(
    modelId: string,
    scenarioIds: string[],
  ): Promise<{ comparison: ComparisonEntry[] }> {
    return this.send("POST", `/models/${modelId}/scenarios/compare`, {
      scenarios: scenarioIds,
    });
  }
}
