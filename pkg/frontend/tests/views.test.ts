import { describe, expect, it } from "vitest";

import { DEFAULT_STATE } from "../src/state";
import type { CurveResponse, SimulateResponse, SolveResponse,
              TablesResponse } from "../src/types";
import { allocationModel, applySimulation, curveModel, markSimulationFailed,
         powerModel } from "../src/views";

import curveR1025 from "./fixtures/curve_r1_025.json";
import sim2pOne from "./fixtures/simulate_2p_one_to_one.json";
import sim2pOpt from "./fixtures/simulate_2p_optimal.json";
import sim2pSqrt from "./fixtures/simulate_2p_sqrt_k.json";
import solveSeparate from "./fixtures/solve_separate.json";
import solveThirdsCc from "./fixtures/solve_thirds_cc.json";
import solveThirdsNcc from "./fixtures/solve_thirds_ncc.json";
import tablesThirdsCc from "./fixtures/tables_thirds_cc.json";

// fixtures are captured verbatim from the running service (see README)
const solveCc = solveThirdsCc as unknown as SolveResponse;
const solveNcc = solveThirdsNcc as unknown as SolveResponse;
const tablesCc = tablesThirdsCc as unknown as TablesResponse;
const curve = curveR1025 as unknown as CurveResponse;

describe("allocation panel", () => {
  it("shows the sqrt(2) split for the symmetric three-period design", () => {
    const model = allocationModel(solveCc, tablesCc, ["optimal"]);
    expect(model.period2[0]).toBeCloseTo(0.414, 3);
    expect(model.period2[1]).toBeCloseTo(0.293, 3);
    expect(model.period2[2]).toBeCloseTo(0.293, 3);
    expect(model.regime).toBe("interior");
    expect(model.certified).toBe(true);
  });

  it("borrowed controls strictly lower the displayed control share", () => {
    const cc = allocationModel(solveCc, tablesCc, ["optimal"]);
    const ncc = allocationModel(solveNcc, tablesCc, ["optimal"]);
    expect(ncc.period2[0]).toBeLessThan(cc.period2[0]);
  });

  it("late entry past one half shows the separate-trials badge", () => {
    const model = allocationModel(solveSeparate as unknown as SolveResponse,
                                  tablesCc, ["optimal"]);
    expect(model.regime).toBe("separate_trials");
  });

  it("carries the rounded table rows through unchanged", () => {
    const model = allocationModel(solveCc, tablesCc, ["one_to_one", "optimal"]);
    const oneToOne = model.table.find((t) => t.strategy === "one_to_one")!;
    expect(oneToOne.control).toEqual([16, 10, 16]);
    const optimal = model.table.find((t) => t.strategy === "optimal")!;
    expect(optimal.control).toEqual([16, 12, 16]);
    expect(optimal.arm1).toEqual([16, 9, 0]);
  });
});

describe("curve panel", () => {
  const state = { ...DEFAULT_STATE, r1: 0.25, r2: 0.5, mode: "cc" as const };

  it("marks the control-share minimum at r2 = 1 - 2 r1", () => {
    const model = curveModel(curve, state);
    expect(model.controlShareMin).not.toBeNull();
    expect(model.controlShareMin!.r2).toBeCloseTo(1 - 2 * 0.25, 2);
  });

  it("overlays both modes with the borrowing curve dashed", () => {
    const model = curveModel(curve, state);
    const modes = model.series.map((s) => [s.mode, s.dashed]);
    expect(modes).toContainEqual(["cc", false]);
    expect(modes).toContainEqual(["ncc", true]);
  });

  it("tracks the current slider position onto the active curve", () => {
    const model = curveModel(curve, state);
    expect(model.current).not.toBeNull();
    expect(model.current!.mode).toBe("cc");
    expect(Math.abs(model.current!.r2 - 0.5)).toBeLessThan(0.01);
  });

  it("sees the variance ratio strictly below one at interior points", () => {
    const model = curveModel(curve, state);
    expect(model.ratioBelowOneEverywhereInterior).toBe(true);
  });

  it("yields an empty model from an empty response", () => {
    const model = curveModel({ request: {}, rows: [] }, state);
    expect(model.series).toEqual([]);
    expect(model.current).toBeNull();
  });
});

describe("power panel", () => {
  const state = { ...DEFAULT_STATE, theta: 0.72, alpha: 0.025 };

  it("approximates power from service variances only", () => {
    const model = powerModel(tablesCc, state);
    const optimal = model.entries.find((e) => e.strategy === "optimal")!;
    expect(optimal.source).toBe("approximation");
    // sqrt(2) design at N=92: roughly 73 percent per arm
    expect(optimal.power1).toBeGreaterThan(0.65);
    expect(optimal.power1).toBeLessThan(0.80);
    expect(optimal.power1).toBeCloseTo(optimal.power2, 10);
  });

  it("null effect collapses the approximation to alpha", () => {
    const model = powerModel(tablesCc, { ...state, theta: 0 });
    for (const entry of model.entries) {
      expect(entry.power1).toBeCloseTo(0.025, 4);
    }
  });

  it("simulation replaces the approximation with MC values and errors", () => {
    const model = powerModel(tablesCc, state);
    const updated = applySimulation(model, "optimal",
                                    sim2pOpt as unknown as SimulateResponse);
    const entry = updated.entries.find((e) => e.strategy === "optimal")!;
    expect(entry.source).toBe("simulation");
    expect(entry.mcSe1).toBeGreaterThan(0);
    const untouched = updated.entries.find((e) => e.strategy === "one_to_one")!;
    expect(untouched.source).toBe("approximation");
  });

  it("simulated two-period powers order optimal above sqrt-k above one-to-one on the weaker arm", () => {
    const minPower = (sim: unknown) => {
      const arms = (sim as SimulateResponse).summary.arms;
      return Math.min(arms.arm1.rejection_rate, arms.arm2.rejection_rate);
    };
    const opt = minPower(sim2pOpt);
    const sqrt = minPower(sim2pSqrt);
    const one = minPower(sim2pOne);
    expect(opt).toBeGreaterThan(sqrt);
    expect(sqrt).toBeGreaterThan(one);
  });

  it("failed simulations keep the approximation and attach a warning", () => {
    const model = powerModel(tablesCc, state);
    const updated = markSimulationFailed(model, "optimal", "boom");
    const entry = updated.entries.find((e) => e.strategy === "optimal")!;
    expect(entry.source).toBe("approximation");
    expect(entry.warning).toBe("boom");
  });
});

describe("URL state drives identical rendered values", () => {
  it("same query string, same render models", async () => {
    const { decodeState, encodeState } = await import("../src/state");
    const q = "r1=0.333333333&r2=0.333333333&n=92&sigma=1&theta=0.72&alpha=0.025"
      + "&mode=cc&strategies=one_to_one,sqrt_k,optimal";
    const a = decodeState(q);
    const b = decodeState(encodeState(a));
    const modelA = powerModel(tablesCc, a);
    const modelB = powerModel(tablesCc, b);
    expect(modelB).toEqual(modelA);
    expect(curveModel(curve, b)).toEqual(curveModel(curve, a));
  });
});
