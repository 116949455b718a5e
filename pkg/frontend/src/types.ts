// Shapes of the service responses the explorer consumes.

export type Mode = "cc" | "ncc";
export type Strategy = "one_to_one" | "sqrt_k" | "optimal";

export interface VarianceBlock {
  n: number;
  sigma: number;
  var1: number | null;
  var2: number | null;
  max_var: number | null;
  ratio_vs_separate: number | null;
}

export interface SolveResponse {
  regime: string;
  mode: Mode;
  plan: { r: number[]; p: number[][] };
  variance: VarianceBlock;
  equal_variance: { relative_gap: number | null; certified: boolean };
  request: Record<string, unknown>;
}

export interface StrategyTable {
  control: number[];
  arm1: number[];
  arm2: number[];
  total: number;
  variance: { var1: number | null; var2: number | null };
}

export interface TablesResponse {
  request: Record<string, unknown>;
  period_totals: number[];
  realized_r: number[];
  tables: Record<Strategy, StrategyTable>;
}

export interface CurveRow {
  r2: number;
  mode: Mode;
  regime: string;
  p02: number;
  p12: number;
  p22: number;
  max_var: number | null;
  ratio_vs_separate: number | null;
}

export interface CurveResponse {
  request: Record<string, unknown>;
  rows: CurveRow[];
}

export interface ArmSummary {
  rejection_rate: number;
  mc_se: number;
  ci_width_mean: number;
  estimate_mean: number;
  estimate_sd: number;
}

export interface SimulateResponse {
  request: Record<string, unknown>;
  summary: {
    reps: number;
    seed: number;
    alpha: number;
    level: number;
    mode: Mode;
    arms: { arm1: ArmSummary; arm2: ArmSummary };
  };
}
