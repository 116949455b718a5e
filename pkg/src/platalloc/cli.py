"""Command-line surface: solve designs, sweep curves, round tables, simulate, serve.

The HTTP service reuses the request parsing and handlers below, so command
output and endpoint bodies come from the same code path and cannot disagree.
Config precedence: flags > PLATALLOC_* environment variables > defaults.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from dataclasses import dataclass

from .model import AnalysisMode, SolverError, TrialParams, ValidationError, max_variance
from .simulate import LinearTrend, SimulationScenario, StepTrend, run_simulation
from .solver import (
    DEFAULT_SETTINGS,
    DesignCase,
    OptimalDesign,
    design_tables,
    solve,
    solve_case3_cc,
    solve_case3_ncc,
)

__all__ = [
    "CurveRequest",
    "SimulateRequest",
    "SolveRequest",
    "TablesRequest",
    "handle_curve",
    "handle_simulate",
    "handle_solve",
    "handle_tables",
    "main",
    "render_json",
]

ENV_PREFIX = "PLATALLOC_"
MAX_SERVICE_REPS = 1_000_000


def _env(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper(), fallback)


def _round6(x: float) -> float:
    return round(float(x), 6)


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


# ---------------------------------------------------------------------------
# requests

def _parse_case(mapping) -> DesignCase:
    kind = mapping.get("case")
    if kind in (None, "", "unrestricted"):
        return DesignCase.unrestricted()
    r1 = mapping.get("r1")
    r2 = mapping.get("r2")
    if kind == "fixed_r1":
        if r1 is None:
            raise ValidationError("case fixed_r1 requires r1")
        return DesignCase.fixed_r1(float(r1))
    if kind == "fixed_r1_r2":
        if r1 is None or r2 is None:
            raise ValidationError("case fixed_r1_r2 requires r1 and r2")
        return DesignCase.fixed_r1_r2(float(r1), float(r2))
    raise ValidationError(f"unknown case {kind!r}; expected unrestricted, fixed_r1, fixed_r1_r2")


@dataclass(frozen=True)
class SolveRequest:
    case: DesignCase
    mode: AnalysisMode
    n: int | None = None
    sigma: float = 1.0

    @classmethod
    def from_mapping(cls, mapping) -> "SolveRequest":
        case = _parse_case(mapping)
        mode = AnalysisMode.parse(mapping.get("mode") or "cc")
        n = mapping.get("n")
        sigma = float(mapping.get("sigma") or 1.0)
        if sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {sigma}")
        if n is not None:
            n = int(n)
            if n < 1:
                raise ValidationError(f"n must be >= 1, got {n}")
        return cls(case=case, mode=mode, n=n, sigma=sigma)

    def describe(self) -> dict:
        out = {"case": self.case.kind, "mode": self.mode.value}
        if self.case.r1 is not None:
            out["r1"] = _round6(self.case.r1)
        if self.case.r2 is not None:
            out["r2"] = _round6(self.case.r2)
        if self.n is not None:
            out["n"] = self.n
        out["sigma"] = self.sigma
        return out


@dataclass(frozen=True)
class CurveRequest:
    r1: float
    mode: str          # "cc" | "ncc" | "both"
    grid: int
    n: int | None = None
    sigma: float = 1.0

    @classmethod
    def from_mapping(cls, mapping) -> "CurveRequest":
        if mapping.get("r1") is None:
            raise ValidationError("curve requires r1")
        r1 = float(mapping["r1"])
        if not 0.0 <= r1 <= 1.0:
            raise ValidationError(f"r1 must lie in [0,1], got {r1}")
        mode = mapping.get("mode") or "both"
        if mode not in ("cc", "ncc", "both"):
            raise ValidationError(f"mode must be cc, ncc, or both, got {mode!r}")
        grid = int(mapping.get("grid") or 101)
        if not 2 <= grid <= 10_000:
            raise ValidationError(f"grid size must lie in [2, 10000], got {grid}")
        n = mapping.get("n")
        n = int(n) if n is not None else None
        sigma = float(mapping.get("sigma") or 1.0)
        return cls(r1=r1, mode=mode, grid=grid, n=n, sigma=sigma)


@dataclass(frozen=True)
class TablesRequest:
    case: DesignCase
    mode: AnalysisMode
    n: int
    sigma: float = 1.0

    @classmethod
    def from_mapping(cls, mapping) -> "TablesRequest":
        if mapping.get("n") is None:
            raise ValidationError("tables requires n")
        base = SolveRequest.from_mapping(mapping)
        return cls(case=base.case, mode=base.mode, n=int(mapping["n"]), sigma=base.sigma)

    def describe(self) -> dict:
        out = {"case": self.case.kind, "mode": self.mode.value}
        if self.case.r1 is not None:
            out["r1"] = _round6(self.case.r1)
        if self.case.r2 is not None:
            out["r2"] = _round6(self.case.r2)
        out["sigma"] = self.sigma
        return out


def _parse_trend(spec):
    if spec in (None, "", "none"):
        return None
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "linear":
            return LinearTrend(slope=float(spec["slope"]))
        if kind == "step":
            shifts = spec.get("shifts")
            if shifts is None or len(shifts) != 3:
                raise ValidationError("step trend needs three shifts")
            return StepTrend(shifts=tuple(float(x) for x in shifts))
        raise ValidationError(f"unknown trend kind {kind!r}")
    text = str(spec)
    if text.startswith("linear:"):
        return LinearTrend(slope=float(text.split(":", 1)[1]))
    if text.startswith("step:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 3:
            raise ValidationError("step trend needs three comma-separated shifts")
        return StepTrend(shifts=tuple(float(x) for x in parts))
    raise ValidationError(f"cannot parse trend {spec!r}")


def _trend_description(trend):
    if trend is None:
        return "none"
    if isinstance(trend, LinearTrend):
        return {"kind": "linear", "slope": trend.slope}
    return {"kind": "step", "shifts": list(trend.shifts)}


@dataclass(frozen=True)
class SimulateRequest:
    scenario: SimulationScenario
    reps: int
    seed: int
    counts_source: dict

    @classmethod
    def from_mapping(cls, mapping) -> "SimulateRequest":
        reps = int(mapping.get("reps") or 10_000)
        if reps < 1:
            raise ValidationError(f"reps must be >= 1, got {reps}")
        seed = int(mapping.get("seed") or 0)
        mode = AnalysisMode.parse(mapping.get("mode") or "cc")

        counts = mapping.get("counts")
        if counts is not None:
            if isinstance(counts, str):
                counts = json.loads(counts)
            source = {"kind": "explicit"}
        else:
            design = mapping.get("design") or mapping
            if design.get("n") is None:
                raise ValidationError("simulate needs either counts or a design with n")
            tab_req = TablesRequest.from_mapping(design)
            strategy = design.get("strategy") or "optimal"
            built = _resolve_tables(tab_req)
            if strategy not in built["tables"]:
                raise ValidationError(f"unknown strategy {strategy!r}")
            counts = built["tables"][strategy].rows
            source = {"kind": "design", "case": tab_req.case.kind,
                      "strategy": strategy, "n": tab_req.n}

        scenario = SimulationScenario.make(
            counts=counts,
            mu0=float(mapping.get("mu0") or 0.0),
            theta=(float(mapping.get("theta1") or 0.0), float(mapping.get("theta2") or 0.0)),
            sigma=float(mapping.get("sigma") or 1.0),
            trend=_parse_trend(mapping.get("trend")),
            alpha_one_sided=float(mapping.get("alpha") or 0.025),
            ci_level=float(mapping.get("level") or 0.95),
            mode=mode,
        )
        return cls(scenario=scenario, reps=reps, seed=seed, counts_source=source)


# ---------------------------------------------------------------------------
# handlers (shared by CLI and HTTP)

def _design_payload(design: OptimalDesign, n: int | None, sigma: float) -> dict:
    params = TrialParams(total_n=n if n is not None else 1, sigma=sigma)
    profile = max_variance(design.plan, params, design.mode)
    worst = profile.max_var
    gap = None
    if math.isfinite(profile.var1) and math.isfinite(profile.var2) and worst > 0:
        gap = abs(profile.var1 - profile.var2) / worst
    return {
        "regime": design.regime.value,
        "mode": design.mode.value,
        "plan": {
            "r": [_round6(x) for x in design.plan.r],
            "p": [[_round6(x) for x in row] for row in design.plan.p],
        },
        "variance": {
            "n": params.total_n,
            "sigma": params.sigma,
            "var1": _finite_or_none(profile.var1),
            "var2": _finite_or_none(profile.var2),
            "max_var": _finite_or_none(worst),
            "ratio_vs_separate": _finite_or_none(profile.ratio_vs_separate)
            if not math.isnan(profile.ratio_vs_separate) else None,
        },
        "equal_variance": {
            "relative_gap": gap,
            "certified": bool(gap is not None
                              and gap <= DEFAULT_SETTINGS.constraint_tol * 10),
        },
    }


def handle_solve(request: SolveRequest) -> dict:
    design = solve(request.case, request.mode)
    payload = _design_payload(design, request.n, request.sigma)
    payload["request"] = request.describe()
    return payload


def _curve_design(r1: float, r2: float, mode: AnalysisMode) -> OptimalDesign:
    if mode is AnalysisMode.WITH_NONCONCURRENT and r1 > 0.0:
        return solve_case3_ncc(r1, r2)
    # with r1 = 0 no non-concurrent data exists and both analyses coincide
    design = solve_case3_cc(r1, r2)
    return OptimalDesign(plan=design.plan, profile=design.profile,
                         regime=design.regime, mode=mode)


def handle_curve(request: CurveRequest) -> dict:
    modes = [AnalysisMode.CONCURRENT_ONLY, AnalysisMode.WITH_NONCONCURRENT]
    if request.mode != "both":
        modes = [AnalysisMode.parse(request.mode)]
    params = TrialParams(total_n=request.n if request.n is not None else 1,
                         sigma=request.sigma)
    span = 1.0 - request.r1
    rows = []
    for mode in modes:
        for i in range(request.grid):
            r2 = span * i / (request.grid - 1)
            design = _curve_design(request.r1, r2, mode)
            profile = max_variance(design.plan, params, mode)
            p2 = design.plan.p[1]
            rows.append({
                "r2": _round6(r2),
                "mode": mode.value,
                "regime": design.regime.value,
                "p02": _round6(p2[0]),
                "p12": _round6(p2[1]),
                "p22": _round6(p2[2]),
                "max_var": _finite_or_none(profile.max_var),
                "ratio_vs_separate": _finite_or_none(profile.ratio_vs_separate)
                if not math.isnan(profile.ratio_vs_separate) else None,
            })
    return {
        "request": {"r1": _round6(request.r1), "mode": request.mode,
                    "grid": request.grid, "n": params.total_n, "sigma": params.sigma},
        "rows": rows,
    }


def _resolve_tables(request: TablesRequest) -> dict:
    if request.case.kind == "unrestricted":
        r = (0.0, 1.0, 0.0)
    elif request.case.kind == "fixed_r1":
        design = solve(request.case, request.mode)
        r = design.plan.r
    else:
        r = (request.case.r1, request.case.r2,
             1.0 - request.case.r1 - request.case.r2)
    return design_tables(r, request.n, request.mode)


def handle_tables(request: TablesRequest) -> dict:
    built = _resolve_tables(request)
    params = TrialParams(total_n=request.n, sigma=request.sigma)
    tables = {}
    for name, table in built["tables"].items():
        profile = max_variance(built["plans"][name], params, request.mode)
        tables[name] = {"control": list(table.control),
                        "arm1": list(table.arm1),
                        "arm2": list(table.arm2),
                        "total": table.total(),
                        "variance": {"var1": _finite_or_none(profile.var1),
                                     "var2": _finite_or_none(profile.var2)}}
    return {
        "request": {**request.describe(), "n": request.n},
        "period_totals": list(built["period_totals"]),
        "realized_r": [_round6(x) for x in built["realized_r"]],
        "tables": tables,
    }


def handle_simulate(request: SimulateRequest) -> dict:
    summary = run_simulation(request.scenario, request.reps, request.seed)
    return {
        "request": {
            "reps": request.reps,
            "seed": request.seed,
            "mode": request.scenario.mode.value,
            "counts": [list(row) for row in request.scenario.counts],
            "counts_source": request.counts_source,
            "mu0": request.scenario.mu0,
            "theta": list(request.scenario.theta),
            "sigma": request.scenario.sigma,
            "trend": _trend_description(request.scenario.trend),
            "alpha": request.scenario.alpha_one_sided,
            "level": request.scenario.ci_level,
        },
        "summary": summary_to_dict(summary),
    }


def summary_to_dict(summary) -> dict:
    arms = {}
    for arm, s in summary.arms.items():
        arms[f"arm{arm}"] = {
            "rejection_rate": s.rejection_rate,
            "mc_se": s.mc_se,
            "ci_width_mean": s.ci_width_mean,
            "estimate_mean": s.estimate_mean,
            "estimate_sd": s.estimate_sd,
        }
    return {
        "reps": summary.reps,
        "seed": summary.seed,
        "alpha": summary.alpha_one_sided,
        "level": summary.ci_level,
        "mode": summary.mode.value,
        "arms": arms,
    }


# ---------------------------------------------------------------------------
# rendering

def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def render_curve_csv(payload: dict) -> str:
    buf = io.StringIO()
    cols = ["r2", "mode", "regime", "p02", "p12", "p22", "max_var", "ratio_vs_separate"]
    buf.write(",".join(cols) + "\n")
    for row in payload["rows"]:
        buf.write(",".join("" if row[c] is None else str(row[c]) for c in cols) + "\n")
    return buf.getvalue()


def render_tables_csv(payload: dict) -> str:
    buf = io.StringIO()
    buf.write("strategy,arm,period1,period2,period3\n")
    for strategy in ("one_to_one", "sqrt_k", "optimal"):
        table = payload["tables"][strategy]
        for arm in ("control", "arm1", "arm2"):
            cells = ",".join(str(x) for x in table[arm])
            buf.write(f"{strategy},{arm},{cells}\n")
    return buf.getvalue()


def render(command: str, payload: dict, fmt: str) -> str:
    if fmt == "json":
        return render_json(payload)
    if fmt == "csv":
        if command == "curve":
            return render_curve_csv(payload)
        if command == "tables":
            return render_tables_csv(payload)
        raise ValidationError(f"csv output is not available for {command!r}")
    raise ValidationError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# argument parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platalloc",
        description="Optimal allocation design and Monte Carlo verification "
                    "for three-period platform trials with a shared control arm.",
        epilog="Flags override PLATALLOC_* environment variables "
               "(e.g. PLATALLOC_FORMAT, PLATALLOC_SEED, PLATALLOC_PORT), "
               "which override built-in defaults.",
    )
    def add_globals(target, default):
        target.add_argument("--format", choices=("json", "csv"), default=default,
                            help="output format (default json; csv for curve/tables)")
        target.add_argument("--out", default=default,
                            help="write output to FILE instead of stdout")
        target.add_argument("--seed", type=int, default=default,
                            help="master seed for simulate (default 0)")

    add_globals(parser, default=None)
    # same flags accepted after the subcommand; SUPPRESS keeps the pre-command value
    common = argparse.ArgumentParser(add_help=False)
    add_globals(common, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    def add_case_args(p):
        p.add_argument("--case", choices=("unrestricted", "fixed_r1", "fixed_r1_r2"),
                       default="unrestricted")
        p.add_argument("--r1", type=float, default=None)
        p.add_argument("--r2", type=float, default=None)
        p.add_argument("--mode", choices=("cc", "ncc"), default="cc",
                       help="analysis mode: concurrent-only or with non-concurrent controls")
        p.add_argument("--sigma", type=float, default=1.0)

    p_solve = sub.add_parser("solve", parents=[common], help="optimal allocation for a design case")
    add_case_args(p_solve)
    p_solve.add_argument("--n", type=int, default=None,
                         help="total sample size for reporting variances (default 1)")

    p_curve = sub.add_parser("curve", parents=[common], help="allocation and variance-ratio sweep over r2")
    p_curve.add_argument("--r1", type=float, required=True)
    p_curve.add_argument("--mode", choices=("cc", "ncc", "both"), default="both")
    p_curve.add_argument("--grid", type=int, default=101)
    p_curve.add_argument("--n", type=int, default=None)
    p_curve.add_argument("--sigma", type=float, default=1.0)

    p_tables = sub.add_parser("tables", parents=[common], help="rounded sample-size tables per strategy")
    add_case_args(p_tables)
    p_tables.add_argument("--n", type=int, required=True)

    p_sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo power / type-1-error run")
    add_case_args(p_sim)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--counts", default=None,
                       help='explicit arm-by-period counts as JSON, e.g. '
                            '"[[16,12,16],[16,9,0],[0,9,16]]"')
    p_sim.add_argument("--strategy", choices=("one_to_one", "sqrt_k", "optimal"),
                       default="optimal")
    p_sim.add_argument("--mu0", type=float, default=0.0)
    p_sim.add_argument("--theta1", type=float, default=0.0)
    p_sim.add_argument("--theta2", type=float, default=0.0)
    p_sim.add_argument("--trend", default="none",
                       help='"none", "linear:SLOPE", or "step:S1,S2,S3"')
    p_sim.add_argument("--alpha", type=float, default=0.025)
    p_sim.add_argument("--level", type=float, default=0.95)
    p_sim.add_argument("--reps", type=int, default=10_000)

    p_serve = sub.add_parser("serve", parents=[common], help="run the JSON-over-HTTP service")
    p_serve.add_argument("--port", type=int, default=None, help="default 8645")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--ui-dir", default=None,
                         help="static directory served at / (explorer UI bundle)")

    return parser


def _mapping_from_args(args) -> dict:
    mapping = {}
    for key in ("case", "r1", "r2", "mode", "grid", "n", "sigma", "counts",
                "strategy", "mu0", "theta1", "theta2", "trend", "alpha", "level",
                "reps"):
        if hasattr(args, key) and getattr(args, key) is not None:
            mapping[key] = getattr(args, key)
    seed = args.seed if args.seed is not None else _env("seed", 0)
    mapping["seed"] = int(seed)
    return mapping


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or _env("format", "json")

    try:
        mapping = _mapping_from_args(args)
        if args.command == "solve":
            payload = handle_solve(SolveRequest.from_mapping(mapping))
        elif args.command == "curve":
            payload = handle_curve(CurveRequest.from_mapping(mapping))
        elif args.command == "tables":
            payload = handle_tables(TablesRequest.from_mapping(mapping))
        elif args.command == "simulate":
            payload = handle_simulate(SimulateRequest.from_mapping(mapping))
        elif args.command == "serve":
            from .service import serve
            port = args.port if args.port is not None else int(_env("port", 8645))
            serve(host=args.host, port=port, ui_dir=args.ui_dir)
            return 0
        else:  # pragma: no cover
            raise ValidationError(f"unknown command {args.command!r}")
        text = render(args.command, payload, fmt)
    except ValidationError as err:
        sys.stderr.write(render_json({"error": {"type": "validation", "message": str(err)}}))
        return 2
    except SolverError as err:
        sys.stderr.write(render_json({"error": {"type": "solver", "message": str(err)}}))
        return 3

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
