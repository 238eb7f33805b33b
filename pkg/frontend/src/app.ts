/** Query orchestration: debounce, superseded-request cancellation, and the
 * keep-last-valid-posterior rule for inconsistent evidence.
 */

import { ApiError, Client } from "./api.js";
import type { Evidence, QueryResult } from "./api.js";

export interface ViewState {
  evidence: Evidence;
  result: QueryResult | null;
  warning: string | null;
  pending: boolean;
}

export class QueryController {
  readonly state: ViewState = {
    evidence: {},
    result: null,
    warning: null,
    pending: false,
  };

  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: AbortController | null = null;
  private generation = 0;

  constructor(
    private readonly client: Client,
    private readonly modelId: string,
    private readonly onRender: (state: ViewState) => void,
    private readonly debounceMs = 150,
  ) {}

  /** Apply an evidence edit; the query fires after the debounce window and
   * any superseded in-flight request is aborted. */
  setEvidence(evidence: Evidence): void {
    this.state.evidence = evidence;
    this.state.pending = true;
    this.onRender(this.state);
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.runQuery();
    }, this.debounceMs);
  }

  /** Immediate query (initial load, scenario restore). */
  async refresh(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    await this.runQuery();
  }

  private async runQuery(): Promise<void> {
    const gen = ++this.generation;
    if (this.inflight !== null) this.inflight.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const result = await this.client.query(
        this.modelId,
        this.state.evidence,
        controller.signal,
      );
      if (gen !== this.generation) return; // superseded
      this.state.result = result;
      this.state.warning = null;
    } catch (err) {
      if (gen !== this.generation) return;
      if (err instanceof DOMException && err.name === "AbortError") return;
      if (err instanceof ApiError && err.status === 409) {
        // Impossible evidence: keep the last valid posterior on screen.
        this.state.warning =
          "evidence has probability zero under this model; " +
          "showing the last valid posteriors";
      } else {
        this.state.warning = err instanceof Error ? err.message : String(err);
      }
    } finally {
      if (gen === this.generation) {
        this.inflight = null;
        this.state.pending = false;
        this.onRender(this.state);
      }
    }
  }
}

/** Round-trip helper: save the working evidence as a named scenario and
 * read it back, returning the stored copy. */
export async function saveAndReload(
  client: Client,
  modelId: string,
  name: string,
  evidence: Evidence,
): Promise<Evidence> {
  await client.saveScenario(modelId, name, evidence);
  const listing = await client.listScenarios(modelId);
  const found = listing.scenarios.find((s) => s.id === name);
  if (!found) throw new Error(`scenario ${name} did not persist`);
  return found.evidence;
}
