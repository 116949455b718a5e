// Pure builders turning service responses into render models. All domain
// numbers come straight from the service; the only computed quantity is the
// labelled normal-approximation power.

import { approximatePower } from "./power";
import type { ExplorerState } from "./state";
import type { CurveResponse, CurveRow, Mode, SimulateResponse, SolveResponse,
              Strategy, TablesResponse } from "./types";

export interface BarSegment {
  arm: "control" | "arm1" | "arm2";
  share: number;
}

export interface AllocationModel {
  regime: string;
  mode: Mode;
  certified: boolean;
  periods: { label: string; fraction: number; segments: BarSegment[] }[];
  /** period-2 shares in arm order control/arm1/arm2, straight from the plan */
  period2: number[];
  table: { strategy: Strategy; control: number[]; arm1: number[];
           arm2: number[]; total: number }[];
  periodTotals: number[];
}

const ARM_NAMES: BarSegment["arm"][] = ["control", "arm1", "arm2"];

export function allocationModel(solve: SolveResponse, tables: TablesResponse,
                                strategies: Strategy[]): AllocationModel {
  const periods = solve.plan.r.map((fraction, s) => ({
    label: `Period ${s + 1}`,
    fraction,
    segments: ARM_NAMES.map((arm, i) => ({ arm, share: solve.plan.p[s][i] }))
      .filter((seg) => seg.share > 0),
  }));
  return {
    regime: solve.regime,
    mode: solve.mode,
    certified: solve.equal_variance.certified,
    periods,
    period2: solve.plan.p[1],
    table: strategies.map((strategy) => ({
      strategy,
      control: tables.tables[strategy].control,
      arm1: tables.tables[strategy].arm1,
      arm2: tables.tables[strategy].arm2,
      total: tables.tables[strategy].total,
    })),
    periodTotals: tables.period_totals,
  };
}

export interface CurveSeries {
  mode: Mode;
  dashed: boolean;  // borrowing mode drawn dashed, matching the figure style
  points: CurveRow[];
}

export interface CurveModel {
  series: CurveSeries[];
  /** row nearest the current r2 in the active mode, to mark on the plot */
  current: CurveRow | null;
  /** location of the control-share minimum along the concurrent-only curve */
  controlShareMin: { r2: number; p02: number } | null;
  ratioBelowOneEverywhereInterior: boolean;
}

export function curveModel(curve: CurveResponse, state: ExplorerState): CurveModel {
  const byMode = new Map<Mode, CurveRow[]>();
  for (const row of curve.rows) {
    if (!byMode.has(row.mode)) {
      byMode.set(row.mode, []);
    }
    byMode.get(row.mode)!.push(row);
  }
  const series: CurveSeries[] = [...byMode.entries()].map(([mode, points]) => ({
    mode,
    dashed: mode === "ncc",
    points,
  }));

  const active = byMode.get(state.mode) ?? [];
  let current: CurveRow | null = null;
  for (const row of active) {
    if (current === null || Math.abs(row.r2 - state.r2) < Math.abs(current.r2 - state.r2)) {
      current = row;
    }
  }

  const ccInterior = (byMode.get("cc") ?? []).filter((r) => r.regime === "interior");
  let controlShareMin: CurveModel["controlShareMin"] = null;
  for (const row of ccInterior) {
    if (controlShareMin === null || row.p02 < controlShareMin.p02) {
      controlShareMin = { r2: row.r2, p02: row.p02 };
    }
  }

  const interior = curve.rows.filter((r) => r.regime === "interior" && r.r2 > 0);
  const ratioBelowOneEverywhereInterior = interior.length > 0
    && interior.every((r) => r.ratio_vs_separate !== null && r.ratio_vs_separate < 1);

  return { series, current, controlShareMin, ratioBelowOneEverywhereInterior };
}

export interface PowerEntry {
  strategy: Strategy;
  source: "approximation" | "simulation";
  label: string;
  power1: number;
  power2: number;
  mcSe1?: number;
  mcSe2?: number;
  warning?: string;
}

export interface PowerModel {
  entries: PowerEntry[];
}

export function powerModel(tables: TablesResponse, state: ExplorerState): PowerModel {
  const entries: PowerEntry[] = state.strategies.map((strategy) => {
    const variance = tables.tables[strategy].variance;
    const se1 = variance.var1 === null ? NaN : Math.sqrt(variance.var1);
    const se2 = variance.var2 === null ? NaN : Math.sqrt(variance.var2);
    return {
      strategy,
      source: "approximation",
      label: "normal approximation",
      power1: approximatePower(state.theta, se1, state.alpha),
      power2: approximatePower(state.theta, se2, state.alpha),
    };
  });
  return { entries };
}

/** Replace one strategy's approximation with exact Monte Carlo numbers. */
export function applySimulation(model: PowerModel, strategy: Strategy,
                                sim: SimulateResponse): PowerModel {
  return {
    entries: model.entries.map((entry) => {
      if (entry.strategy !== strategy) {
        return entry;
      }
      const arms = sim.summary.arms;
      return {
        strategy,
        source: "simulation",
        label: `simulated, ${sim.summary.reps} replicates`,
        power1: arms.arm1.rejection_rate,
        power2: arms.arm2.rejection_rate,
        mcSe1: arms.arm1.mc_se,
        mcSe2: arms.arm2.mc_se,
      };
    }),
  };
}

/** Keep the approximation visible but warn when a simulation request failed. */
export function markSimulationFailed(model: PowerModel, strategy: Strategy,
                                     message: string): PowerModel {
  return {
    entries: model.entries.map((entry) =>
      entry.strategy === strategy ? { ...entry, warning: message } : entry),
  };
}
