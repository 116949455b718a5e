// Controller: state <-> URL <-> sliders, debounced panel refreshes, one
// outstanding request per panel with cancellation of superseded ones.

import { curveQuery, debounce, makeClients, simulateBody, solveQuery,
         tablesQuery } from "./api";
import { renderAllocation, renderCurves, renderPower, setStale,
         showError } from "./dom";
import { ALL_STRATEGIES, DEFAULT_STATE, ExplorerState, coupleSliders,
         decodeState, encodeState } from "./state";
import type { CurveResponse, SimulateResponse, SolveResponse, Strategy,
              TablesResponse } from "./types";
import { allocationModel, applySimulation, curveModel, markSimulationFailed,
         powerModel, PowerModel } from "./views";

const clients = makeClients("");

let state: ExplorerState = decodeState(window.location.search.replace(/^\?/, ""));
let currentPower: PowerModel | null = null;
let lastTables: TablesResponse | null = null;

const panels = {
  allocation: document.getElementById("allocation-panel")!,
  curve: document.getElementById("curve-panel")!,
  power: document.getElementById("power-panel")!,
};

function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}

function syncUrl(): void {
  const query = encodeState(state);
  window.history.replaceState(null, "", `?${query}`);
}

async function refreshAllocation(): Promise<void> {
  setStale(panels.allocation, true);
  try {
    const solve = await clients.allocation.get<SolveResponse>(
      solveQuery(state, state.mode));
    const tables = await clients.tables.get<TablesResponse>(
      tablesQuery(state, state.mode));
    lastTables = tables;
    renderAllocation(panels.allocation, allocationModel(solve, tables,
      state.strategies.length ? state.strategies : ALL_STRATEGIES));
    showError(panels.allocation, null);
    setStale(panels.allocation, false);
    refreshPowerFromTables(tables);
  } catch (err) {
    if (isAbort(err)) {
      return;
    }
    showError(panels.allocation, String(err));
  }
}

async function refreshCurve(): Promise<void> {
  setStale(panels.curve, true);
  try {
    const curve = await clients.curve.get<CurveResponse>(curveQuery(state));
    renderCurves(panels.curve, curveModel(curve, state), state.r1);
    showError(panels.curve, null);
    setStale(panels.curve, false);
  } catch (err) {
    if (isAbort(err)) {
      return;
    }
    showError(panels.curve, String(err));
  }
}

function refreshPowerFromTables(tables: TablesResponse): void {
  currentPower = powerModel(tables, state);
  renderPower(panels.power, currentPower, runSimulation);
  setStale(panels.power, false);
}

async function runSimulation(strategy: string): Promise<void> {
  if (currentPower === null) {
    return;
  }
  setStale(panels.power, true);
  try {
    const sim = await clients.simulate.post<SimulateResponse>(
      "/simulate", simulateBody(state, strategy as Strategy));
    if (currentPower !== null) {
      currentPower = applySimulation(currentPower, strategy as Strategy, sim);
      renderPower(panels.power, currentPower, runSimulation);
    }
  } catch (err) {
    if (!isAbort(err) && currentPower !== null) {
      currentPower = markSimulationFailed(currentPower, strategy as Strategy,
                                          String(err));
      renderPower(panels.power, currentPower, runSimulation);
    }
  } finally {
    setStale(panels.power, false);
  }
}

const refreshAll = debounce(() => {
  syncUrl();
  void refreshAllocation();
  void refreshCurve();
}, 150);

// ---------------------------------------------------------------------------
// controls

function bindSlider(id: string, key: "r1" | "r2", labelId: string): void {
  const input = document.getElementById(id) as HTMLInputElement;
  const label = document.getElementById(labelId)!;
  const update = () => {
    state = coupleSliders(state, key, Number(input.value));
    (document.getElementById("r1") as HTMLInputElement).value = String(state.r1);
    (document.getElementById("r2") as HTMLInputElement).value = String(state.r2);
    document.getElementById("r1-label")!.textContent = state.r1.toFixed(3);
    document.getElementById("r2-label")!.textContent = state.r2.toFixed(3);
    [panels.allocation, panels.curve, panels.power].forEach((p) => setStale(p, true));
    refreshAll();
  };
  input.value = String(state[key]);
  label.textContent = state[key].toFixed(3);
  input.addEventListener("input", update);
}

function bindNumber(id: string, key: "n" | "sigma" | "theta" | "alpha"): void {
  const input = document.getElementById(id) as HTMLInputElement;
  input.value = String(state[key]);
  input.addEventListener("change", () => {
    const value = Number(input.value);
    if (Number.isFinite(value) && value > 0) {
      state = { ...state, [key]: key === "n" ? Math.round(value) : value };
      refreshAll();
    }
  });
}

function bindMode(): void {
  const inputs = document.querySelectorAll<HTMLInputElement>("input[name=mode]");
  inputs.forEach((input) => {
    input.checked = input.value === state.mode;
    input.addEventListener("change", () => {
      if (input.checked) {
        state = { ...state, mode: input.value as ExplorerState["mode"] };
        refreshAll();
      }
    });
  });
}

function bindStrategies(): void {
  const inputs = document.querySelectorAll<HTMLInputElement>("input[name=strategy]");
  inputs.forEach((input) => {
    input.checked = state.strategies.includes(input.value as Strategy);
    input.addEventListener("change", () => {
      const chosen = [...inputs].filter((i) => i.checked)
        .map((i) => i.value as Strategy);
      state = { ...state, strategies: chosen };
      syncUrl();
      if (lastTables !== null) {
        refreshPowerFromTables(lastTables);
        void refreshAllocation();
      }
    });
  });
}

function init(): void {
  if (!window.location.search) {
    state = { ...DEFAULT_STATE, strategies: [...DEFAULT_STATE.strategies] };
  }
  bindSlider("r1", "r1", "r1-label");
  bindSlider("r2", "r2", "r2-label");
  bindNumber("n", "n");
  bindNumber("sigma", "sigma");
  bindNumber("theta", "theta");
  bindNumber("alpha", "alpha");
  bindMode();
  bindStrategies();
  syncUrl();
  void refreshAllocation();
  void refreshCurve();
}

init();
