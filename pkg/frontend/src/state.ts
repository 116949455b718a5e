// Explorer state and its URL encoding. The whole view is a function of this
// object; reloading a copied URL reproduces it exactly.

import type { Mode, Strategy } from "./types";

export interface ExplorerState {
  r1: number;
  r2: number;
  n: number;
  sigma: number;
  theta: number;
  alpha: number;
  mode: Mode;
  strategies: Strategy[];
}

export const ALL_STRATEGIES: Strategy[] = ["one_to_one", "sqrt_k", "optimal"];

export const DEFAULT_STATE: ExplorerState = {
  r1: 1 / 3,
  r2: 1 / 3,
  n: 92,
  sigma: 1.0,
  theta: 0.72,
  alpha: 0.025,
  mode: "cc",
  strategies: ["one_to_one", "sqrt_k", "optimal"],
};

/** Keep the slider pair feasible: r1 + r2 <= 1, both within [0, 1]. */
export function coupleSliders(state: ExplorerState, changed: "r1" | "r2",
                              value: number): ExplorerState {
  const v = Math.min(1, Math.max(0, value));
  if (changed === "r1") {
    return { ...state, r1: v, r2: Math.min(state.r2, 1 - v) };
  }
  return { ...state, r2: Math.min(v, 1 - state.r1) };
}

const NUMERIC_KEYS = ["r1", "r2", "n", "sigma", "theta", "alpha"] as const;

export function encodeState(state: ExplorerState): string {
  const params = new URLSearchParams();
  for (const key of NUMERIC_KEYS) {
    params.set(key, String(state[key]));
  }
  params.set("mode", state.mode);
  params.set("strategies", state.strategies.join(","));
  return params.toString();
}

export function decodeState(query: string): ExplorerState {
  const params = new URLSearchParams(query);
  const state: ExplorerState = { ...DEFAULT_STATE, strategies: [...DEFAULT_STATE.strategies] };
  for (const key of NUMERIC_KEYS) {
    const raw = params.get(key);
    if (raw !== null && raw !== "" && Number.isFinite(Number(raw))) {
      state[key] = Number(raw);
    }
  }
  const mode = params.get("mode");
  if (mode === "cc" || mode === "ncc") {
    state.mode = mode;
  }
  const strategies = params.get("strategies");
  if (strategies !== null) {
    const chosen = strategies.split(",").filter(
      (s): s is Strategy => (ALL_STRATEGIES as string[]).includes(s));
    state.strategies = chosen;
  }
  // re-apply feasibility in case the URL was edited by hand
  if (state.r1 + state.r2 > 1) {
    state.r2 = Math.max(0, 1 - state.r1);
  }
  return state;
}
