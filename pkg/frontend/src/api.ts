// Service client: one in-flight request per panel, cancelled on supersession,
// with a shared debounce helper for slider interaction.

import type { CurveResponse, Mode, SimulateResponse, SolveResponse, Strategy,
              TablesResponse } from "./types";
import type { ExplorerState } from "./state";

export class ServiceError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let message = `HTTP ${response.status}`;
    try {
      const body = await response.json();
      if (body?.error?.message) {
        message = body.error.message;
      }
    } catch {
      // keep the status-line message
    }
    throw new ServiceError(message, response.status);
  }
  return response.json() as Promise<T>;
}

export function solveQuery(state: ExplorerState, mode: Mode): string {
  const params = new URLSearchParams({
    case: "fixed_r1_r2",
    r1: String(state.r1),
    r2: String(state.r2),
    mode,
    n: String(state.n),
    sigma: String(state.sigma),
  });
  return `/solve?${params.toString()}`;
}

export function tablesQuery(state: ExplorerState, mode: Mode): string {
  const params = new URLSearchParams({
    case: "fixed_r1_r2",
    r1: String(state.r1),
    r2: String(state.r2),
    mode,
    n: String(state.n),
    sigma: String(state.sigma),
  });
  return `/tables?${params.toString()}`;
}

export function curveQuery(state: ExplorerState, grid = 151): string {
  const params = new URLSearchParams({
    r1: String(state.r1),
    mode: "both",
    grid: String(grid),
    n: String(state.n),
    sigma: String(state.sigma),
  });
  return `/curve?${params.toString()}`;
}

export function simulateBody(state: ExplorerState, strategy: Strategy,
                             reps = 10_000, seed = 20_452): Record<string, unknown> {
  return {
    case: "fixed_r1_r2",
    r1: state.r1,
    r2: state.r2,
    n: state.n,
    strategy,
    mode: state.mode,
    mu0: 0,
    theta1: state.theta,
    theta2: state.theta,
    sigma: state.sigma,
    alpha: state.alpha,
    reps,
    seed,
  };
}

export class PanelClient {
  private controller: AbortController | null = null;

  constructor(private readonly baseUrl: string) {}

  /** Issue a GET, cancelling whatever this panel had in flight. */
  async get<T>(path: string): Promise<T> {
    this.controller?.abort();
    this.controller = new AbortController();
    const response = await fetch(this.baseUrl + path,
                                 { signal: this.controller.signal });
    return parseOrThrow<T>(response);
  }

  async post<T>(path: string, body: unknown): Promise<T> {
    this.controller?.abort();
    this.controller = new AbortController();
    const response = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal: this.controller.signal,
    });
    return parseOrThrow<T>(response);
  }
}

export interface ServiceClients {
  allocation: PanelClient;
  tables: PanelClient;
  curve: PanelClient;
  power: PanelClient;
  simulate: PanelClient;
}

export function makeClients(baseUrl: string): ServiceClients {
  return {
    allocation: new PanelClient(baseUrl),
    tables: new PanelClient(baseUrl),
    curve: new PanelClient(baseUrl),
    power: new PanelClient(baseUrl),
    simulate: new PanelClient(baseUrl),
  };
}

export type SolveFetch = (state: ExplorerState, mode: Mode) => Promise<SolveResponse>;
export type TablesFetch = (state: ExplorerState, mode: Mode) => Promise<TablesResponse>;
export type CurveFetch = (state: ExplorerState) => Promise<CurveResponse>;
export type SimulateFetch = (state: ExplorerState, strategy: Strategy)
  => Promise<SimulateResponse>;

/** Call fn once the user has been idle for `waitMs`; stale timers cancelled. */
export function debounce<A extends unknown[]>(fn: (...args: A) => void,
                                              waitMs = 150): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer !== null) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, waitMs);
  };
}
