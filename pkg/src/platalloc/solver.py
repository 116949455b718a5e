"""Optimal allocation solvers for the three entry-time cases, both analysis modes.

Case 1 leaves the period split free, case 2 fixes r1, case 3 fixes r1 and r2.
Interior optima satisfy the equal-variance constraint; boundary regimes fall
out of the case analysis. Also provides precision-to-sample-size inversion,
a brute-force grid oracle for testing, and integer rounding of designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import (
    AllocationPlan,
    AnalysisMode,
    SolverError,
    TrialParams,
    ValidationError,
    VarianceProfile,
    arm_information,
    max_variance,
    ncc_information_arm2,
)

__all__ = [
    "CountsTable",
    "DesignCase",
    "OptimalDesign",
    "Regime",
    "SolverSettings",
    "design_tables",
    "min_sample_size",
    "one_to_one_plan",
    "oracle_grid_search",
    "round_allocation",
    "solve",
    "solve_case1",
    "solve_case2_cc",
    "solve_case2_ncc",
    "solve_case3_cc",
    "solve_case3_ncc",
    "sqrt_k_plan",
]

SQRT2 = math.sqrt(2.0)
# square-root-of-k rule for k = 2: control gets sqrt(2) shares, each arm one
P0_MULTI_ARM = 1.0 / (1.0 + SQRT2)
P_ARM_MULTI_ARM = 1.0 - 1.0 / SQRT2

# closed forms lose precision to cancellation below this r1; fall back to numerics
_TINY_R1 = 1e-6


class Regime(Enum):
    """Qualitative shape of the optimal design."""

    INTERIOR = "interior"
    SEPARATE_TRIALS = "separate_trials"
    ALL_TO_ARM1 = "all_to_arm1"
    MULTI_ARM = "multi_arm"
    TWO_PERIOD = "two_period"  # reserved for explicitly two-period layouts


@dataclass(frozen=True)
class SolverSettings:
    root_tol: float = 1e-12
    constraint_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self) -> None:
        if self.root_tol <= 0 or self.constraint_tol <= 0:
            raise ValidationError("tolerances must be positive")
        if self.max_iter < 10:
            raise ValidationError("max_iter must be >= 10")


DEFAULT_SETTINGS = SolverSettings()


@dataclass(frozen=True)
class DesignCase:
    """Which period fractions are fixed: none, r1 only, or r1 and r2."""

    kind: str  # "unrestricted" | "fixed_r1" | "fixed_r1_r2"
    r1: float | None = None
    r2: float | None = None

    @classmethod
    def unrestricted(cls) -> "DesignCase":
        return cls("unrestricted")

    @classmethod
    def fixed_r1(cls, r1: float) -> "DesignCase":
        if not 0.0 <= r1 <= 1.0:
            raise ValidationError(f"r1 must lie in [0,1], got {r1}")
        return cls("fixed_r1", r1=float(r1))

    @classmethod
    def fixed_r1_r2(cls, r1: float, r2: float) -> "DesignCase":
        if r1 < 0 or r2 < 0 or r1 > 1 or r2 > 1:
            raise ValidationError(f"r1, r2 must lie in [0,1], got ({r1}, {r2})")
        if r1 + r2 > 1.0 + 1e-12:
            raise ValidationError(f"r1 + r2 must be <= 1, got {r1 + r2}")
        return cls("fixed_r1_r2", r1=float(r1), r2=float(min(r2, 1.0 - r1)))


@dataclass(frozen=True)
class OptimalDesign:
    plan: AllocationPlan
    profile: VarianceProfile
    regime: Regime
    mode: AnalysisMode


def _plan(r: tuple[float, float, float],
          p2: tuple[float, float, float] | None) -> AllocationPlan:
    """Assemble a plan with equal splits in periods 1 and 3 (optimal there)."""
    r1, r2, r3 = r
    zero = (0.0, 0.0, 0.0)
    p1 = (0.5, 0.5, 0.0) if r1 > 0 else zero
    p3 = (0.5, 0.0, 0.5) if r3 > 0 else zero
    row2 = tuple(p2) if (r2 > 0 and p2 is not None) else zero
    return AllocationPlan.make((r1, r2, r3), (p1, row2, p3))


def _design(r, p2, regime: Regime, mode: AnalysisMode,
            sigma: float = 1.0) -> OptimalDesign:
    plan = _plan(r, p2)
    profile = max_variance(plan, TrialParams(total_n=1, sigma=sigma), mode)
    return OptimalDesign(plan=plan, profile=profile, regime=regime, mode=mode)


# ---------------------------------------------------------------------------
# interior machinery, concurrent controls

def _interior_balance(p22: float) -> float:
    """Stationarity ratio of the interior period-2 optimum as a function of p22.

    Monotone increasing from 1/2 at p22 = 0 to +inf as p22 -> 1/2, where it
    equals r2/(1-2*r1) at the optimum; equals exactly 1 at p22 = 1 - 1/sqrt(2).
    """
    poly = p22 * (p22 * (p22 * (2 * p22 * (2 * p22 - 7) + 19) - 15) + 7) - 2
    return (1 - p22) ** 3 / ((2 * p22 - 1) * poly)


def _control_share_from_p22(p22: float) -> float:
    """Stationarity companion: optimal p02 given the interior p22."""
    return 1.0 / (2.0 * (1.0 - p22)) - p22


def _bracket_root(f, lo: float, hi: float, n_scan: int, tol: float, max_iter: int):
    """Sign-scan ``n_scan`` points then bisect; None when no sign change exists."""
    xs = np.linspace(lo, hi, n_scan)
    vals = [f(x) for x in xs]
    for i in range(n_scan - 1):
        a, b = xs[i], xs[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            return float(a)
        if fa * fb < 0.0:
            for _ in range(max_iter):
                m = 0.5 * (a + b)
                fm = f(m)
                if fm == 0.0 or (b - a) < tol:
                    return float(m)
                if fa * fm < 0.0:
                    b, fb = m, fm
                else:
                    a, fa = m, fm
            return float(0.5 * (a + b))
    if vals[-1] == 0.0:
        return float(xs[-1])
    return None


def _interior_p2_cc(r1: float, r2: float, settings: SolverSettings) -> tuple[float, float, float]:
    """Period-2 proportions for the interior regime (r1 < 1/2 < r1 + r2)."""
    target = r2 / (1.0 - 2.0 * r1)
    if target == 1.0:
        # symmetric split between the arms; the balance equation holds exactly
        return P0_MULTI_ARM, P_ARM_MULTI_ARM, P_ARM_MULTI_ARM
    eps = 1e-13
    root = _bracket_root(lambda p: _interior_balance(p) - target,
                         eps, 0.5 - eps, 64, settings.root_tol, settings.max_iter)
    if root is None:
        raise SolverError(
            f"no sign change for the interior balance equation on (0, 1/2); "
            f"r1={r1}, r2={r2}, target={target}"
        )
    p22 = root
    p02 = _control_share_from_p22(p22)
    p12 = 1.0 - p02 - p22
    return p02, p12, p22


def solve_case3_cc(r1: float, r2: float,
                   settings: SolverSettings = DEFAULT_SETTINGS) -> OptimalDesign:
    """Fixed r1 and r2, analysis with concurrent controls only."""
    _check_r1_r2(r1, r2)
    r3 = 1.0 - r1 - r2
    mode = AnalysisMode.CONCURRENT_ONLY
    if r1 >= 0.5:
        # period 1 already outweighs everything arm 2 can collect
        return _design((r1, r2, r3), (0.5, 0.0, 0.5), Regime.SEPARATE_TRIALS, mode)
    if r1 + r2 <= 0.5:
        return _design((r1, r2, r3), (0.5, 0.5, 0.0), Regime.ALL_TO_ARM1, mode)
    p02, p12, p22 = _interior_p2_cc(r1, r2, settings)
    return _design((r1, r2, r3), (p02, p12, p22), Regime.INTERIOR, mode)


def solve_case2_cc(r1: float,
                   settings: SolverSettings = DEFAULT_SETTINGS) -> OptimalDesign:
    """Fixed r1 only; the optimum pushes r2 to 1 - r1 whenever r1 <= 1/2."""
    _check_r1(r1)
    mode = AnalysisMode.CONCURRENT_ONLY
    if r1 > 0.5:
        # two separate consecutive trials; r2 = 0 is the canonical representative
        return _design((r1, 0.0, 1.0 - r1), None, Regime.SEPARATE_TRIALS, mode)
    if r1 == 0.0:
        return solve_case1(mode)
    inner = solve_case3_cc(r1, 1.0 - r1, settings)
    regime = Regime.MULTI_ARM if r1 == 0.0 else inner.regime
    return OptimalDesign(plan=inner.plan, profile=inner.profile, regime=regime, mode=mode)


def solve_case1(mode: AnalysisMode = AnalysisMode.CONCURRENT_ONLY) -> OptimalDesign:
    """Unrestricted: a single-period multi-arm trial with the sqrt(2) control share."""
    mode = AnalysisMode.parse(mode)
    return _design((0.0, 1.0, 0.0),
                   (P0_MULTI_ARM, P_ARM_MULTI_ARM, P_ARM_MULTI_ARM),
                   Regime.MULTI_ARM, mode)


# ---------------------------------------------------------------------------
# non-concurrent controls

def _ncc_p22_closed_form(r1: float) -> float:
    """Closed-form interior p22 for the two-period design with borrowing.

    Tiny negative radicands (floating-point noise near r1 -> 0) clamp to 0.
    """
    s3 = math.sqrt(3.0)

    def _safe_sqrt(x: float) -> float:
        if x < 0.0:
            if x < -1e-12:
                raise ValidationError(f"negative radicand {x} in closed-form allocation")
            x = 0.0
        return math.sqrt(x)

    a = np.cbrt(9 * r1 * (3 * (r1 - 4) * r1 + 4)
                + 6 * s3 * _safe_sqrt(r1 * (16 - 9 * r1 * (3 * (r1 - 4) * r1 + 8)))
                + 8)
    b = 6 * (a - 4) * r1 + (a - 2) ** 2 + 9 * r1**2
    big = (4 + 8 * a + a * a - 12 * (2 + a) * r1
           + 12 * r1 * s3 * _safe_sqrt(a**3 * (1 - r1) / (-b)) + 9 * r1**2)
    return 1.0 + (_safe_sqrt(-b) - _safe_sqrt(big)) / (4 * s3 * math.sqrt(a * (1 - r1)))


def _info1_of(r1: float, r2: float, p12: float, p22: float) -> float:
    p02 = 1.0 - p12 - p22
    if p12 <= 0.0 or p02 <= 0.0:
        pair = 0.0
    else:
        pair = p12 * p02 / (p12 + p02)
    return 0.25 * r1 + r2 * pair


def _info2_ncc_of(r1: float, r2: float, r3: float, p12: float, p22: float) -> float:
    q22 = p22 * (1.0 - p22)
    corr = 0.0
    if p12 > 0.0:
        denom = 0.25 * r1 + r2 * p12 * (1.0 - p12)
        if denom > 0.0:
            corr = r2 * p12**2 * p22**2 / denom
    return 0.25 * r3 + r2 * (q22 - corr)


def _ncc_p12_from_constraint(r1: float, r2: float, r3: float, p22: float,
                             settings: SolverSettings) -> float | None:
    """p12 equalizing the two arms' information at the given p22, or None."""
    hi = 1.0 - p22 - 1e-12
    if hi <= 0.0:
        return None
    h = lambda p12: _info1_of(r1, r2, p12, p22) - _info2_ncc_of(r1, r2, r3, p12, p22)
    return _bracket_root(h, 1e-12, hi, 64, settings.root_tol, settings.max_iter)


def solve_case2_ncc(r1: float,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> OptimalDesign:
    """Fixed r1, arm 2 analyzed with non-concurrent controls; optimum has r3 = 0."""
    _check_r1(r1)
    mode = AnalysisMode.WITH_NONCONCURRENT
    if r1 >= 0.5:
        return _design((r1, 0.0, 1.0 - r1), None, Regime.SEPARATE_TRIALS, mode)
    if r1 == 0.0:
        return solve_case1(mode)
    r2 = 1.0 - r1
    if r1 >= _TINY_R1:
        p22 = _ncc_p22_closed_form(r1)
        p12 = _ncc_p12_from_constraint(r1, r2, 0.0, p22, settings)
        if p12 is None:
            raise SolverError(f"equal-variance constraint unsolvable at r1={r1}, p22={p22}")
    else:
        p02, p12, p22 = _interior_p2_ncc(r1, r2, 0.0, settings)
    p02 = 1.0 - p12 - p22
    return _design((r1, r2, 0.0), (p02, p12, p22), Regime.INTERIOR, mode)


def _interior_p2_ncc(r1: float, r2: float, r3: float,
                     settings: SolverSettings) -> tuple[float, float, float]:
    """Interior optimum with borrowing: nested scalar solves.

    Inner: the equal-variance constraint pins p12 at each trial p22 (arm-2
    information is decreasing in p12, so the leftmost root carries the best
    common value). Outer: maximize arm-1 information over p22 by a dense scan
    followed by golden-section refinement around the best scan cell; a plain
    line search is unreliable here because the feasible p22 set can have
    edges where the constraint stops being solvable.
    """
    def objective(p22: float) -> float:
        p12 = _ncc_p12_from_constraint(r1, r2, r3, p22, settings)
        if p12 is None or p12 < 0.0 or p12 + p22 >= 1.0:
            return -math.inf
        return _info1_of(r1, r2, p12, p22)

    grid = np.linspace(1e-9, 1.0 - 1e-9, 257)
    values = [objective(x) for x in grid]
    best = int(np.argmax(values))
    if not math.isfinite(values[best]):
        raise SolverError(f"equal-variance constraint infeasible for r1={r1}, r2={r2}")

    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, len(grid) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(settings.max_iter * 4):
        if b - a < settings.root_tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    p22 = 0.5 * (a + b)
    p12 = _ncc_p12_from_constraint(r1, r2, r3, p22, settings)
    if p12 is None:
        # fall back to the best scanned point; the refined cell lost feasibility
        p22 = float(grid[best])
        p12 = _ncc_p12_from_constraint(r1, r2, r3, p22, settings)
        if p12 is None:
            raise SolverError(f"constraint lost at converged p22={p22} (r1={r1}, r2={r2})")
    return 1.0 - p12 - p22, p12, p22


def solve_case3_ncc(r1: float, r2: float,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> OptimalDesign:
    """Fixed r1 > 0 and r2, arm 2 analyzed with non-concurrent controls."""
    if r1 <= 0.0:
        raise ValidationError(f"this case requires r1 > 0, got {r1}")
    _check_r1_r2(r1, r2)
    r3 = 1.0 - r1 - r2
    mode = AnalysisMode.WITH_NONCONCURRENT
    if r1 >= 0.5:
        # strictly above one half this is the late-entry regime; at exactly one
        # half the interior equal-variance solution coincides with the same
        # two-trial split, and the tie is labeled separate_trials
        return _design((r1, r2, r3), (0.5, 0.0, 0.5), Regime.SEPARATE_TRIALS, mode)
    if r1 + r2 <= 0.5:
        return _design((r1, r2, r3), (0.5, 0.5, 0.0), Regime.ALL_TO_ARM1, mode)
    p02, p12, p22 = _interior_p2_ncc(r1, r2, r3, settings)
    return _design((r1, r2, r3), (p02, p12, p22), Regime.INTERIOR, mode)


# ---------------------------------------------------------------------------
# dispatch, sample size, oracle

def solve(case: DesignCase, mode: AnalysisMode,
          settings: SolverSettings = DEFAULT_SETTINGS) -> OptimalDesign:
    mode = AnalysisMode.parse(mode)
    if case.kind == "unrestricted":
        return solve_case1(mode)
    if case.kind == "fixed_r1":
        if mode is AnalysisMode.WITH_NONCONCURRENT:
            return solve_case2_ncc(case.r1, settings)
        return solve_case2_cc(case.r1, settings)
    if case.kind == "fixed_r1_r2":
        if mode is AnalysisMode.WITH_NONCONCURRENT:
            return solve_case3_ncc(case.r1, case.r2, settings)
        return solve_case3_cc(case.r1, case.r2, settings)
    raise ValidationError(f"unknown design case kind {case.kind!r}")


def min_sample_size(target_se: float, case: DesignCase, mode: AnalysisMode,
                    sigma: float = 1.0,
                    settings: SolverSettings = DEFAULT_SETTINGS) -> int:
    """Smallest N whose optimal design meets the target max standard error.

    The optimal allocation does not depend on N and max_var scales as 1/N, so
    N = ceil(sigma^2 * B / target_se^2) with B the unit-N max variance; the
    candidate is then verified (and nudged) by direct evaluation.
    """
    if not target_se > 0:
        raise ValidationError(f"target_se must be positive, got {target_se}")
    design = solve(case, mode, settings)
    unit_max_var = max_variance(design.plan, TrialParams(1, sigma), design.mode).max_var
    n = max(1, math.ceil(unit_max_var / target_se**2 - 1e-12))

    def se_at(n_val: int) -> float:
        profile = max_variance(design.plan, TrialParams(n_val, sigma), design.mode)
        return math.sqrt(profile.max_var)

    while n > 1 and se_at(n - 1) <= target_se:
        n -= 1
    while se_at(n) > target_se:
        n += 1
    return n


def _grid_information(r1: float, r2: float, mode: AnalysisMode, p12, p22):
    """Vectorized min-information over a (p12, p22) grid; invalid cells -> -inf."""
    p02 = 1.0 - p12 - p22
    valid = p02 >= -1e-12
    p02 = np.clip(p02, 0.0, 1.0)
    pair1 = np.where((p12 > 0) & (p02 > 0), p12 * p02 / np.maximum(p12 + p02, 1e-300), 0.0)
    info1 = 0.25 * r1 + r2 * pair1
    r3 = 1.0 - r1 - r2
    if mode is AnalysisMode.WITH_NONCONCURRENT:
        q22 = p22 * (1.0 - p22)
        denom = 0.25 * r1 + r2 * p12 * (1.0 - p12)
        corr = np.where(p12 > 0, r2 * p12**2 * p22**2 / np.maximum(denom, 1e-300), 0.0)
        info2 = 0.25 * r3 + r2 * (q22 - corr)
    else:
        pair2 = np.where((p22 > 0) & (p02 > 0), p22 * p02 / np.maximum(p22 + p02, 1e-300), 0.0)
        info2 = 0.25 * r3 + r2 * pair2
    return np.where(valid, np.minimum(info1, info2), -np.inf)


def oracle_grid_search(case: DesignCase, mode: AnalysisMode,
                       resolution: float = 1e-3) -> OptimalDesign:
    """Brute-force scan of the feasible allocations; test oracle, not for production.

    Proportions are scanned at ``resolution``. Free period fractions (cases
    with unfixed r2 or r1) are scanned at max(resolution, 1/50) to keep the
    search tractable; the known optima of those cases sit on that grid.
    """
    mode = AnalysisMode.parse(mode)
    if not 0.0 < resolution <= 0.1:
        raise ValidationError(f"resolution must lie in (0, 0.1], got {resolution}")

    axis = np.arange(0.0, 1.0 + resolution / 2, resolution)
    # block the p22 axis so fine resolutions stay within a bounded footprint
    block = max(1, int(4_000_000 // max(len(axis), 1)))

    r_step = max(resolution, 1.0 / 50.0)
    if case.kind == "unrestricted":
        r1_axis = np.arange(0.0, 1.0 + r_step / 2, r_step)
    elif case.kind == "fixed_r1":
        r1_axis = np.array([case.r1])
    else:
        r1_axis = np.array([case.r1])

    best = None   # (min_info, r1, r2, p02, p12, p22)
    for r1 in r1_axis:
        if case.kind == "fixed_r1_r2":
            r2_axis = np.array([case.r2])
        else:
            r2_axis = np.arange(0.0, 1.0 - r1 + r_step / 2, r_step)
            r2_axis = np.clip(r2_axis, 0.0, 1.0 - r1)
        for r2 in r2_axis:
            if r2 <= 0.0:
                # empty period 2: only the boundary design is available
                info = min(0.25 * r1, 0.25 * (1.0 - r1))
                cand = (info, float(r1), 0.0, 0.0, 0.0, 0.0)
                if best is None or cand[0] > best[0]:
                    best = cand
                continue
            for start in range(0, len(axis), block):
                p22_slice = axis[start:start + block]
                p12g, p22g = np.meshgrid(axis, p22_slice, indexing="ij")
                p12f, p22f = p12g.ravel(), p22g.ravel()
                scores = _grid_information(float(r1), float(r2), mode, p12f, p22f)
                k = int(np.argmax(scores))
                if best is None or scores[k] > best[0]:
                    p12v, p22v = float(p12f[k]), float(p22f[k])
                    best = (float(scores[k]), float(r1), float(r2),
                            1.0 - p12v - p22v, p12v, p22v)

    _, r1, r2, p02, p12, p22 = best
    r3 = 1.0 - r1 - r2
    p2 = (p02, p12, p22) if r2 > 0 else None
    if r2 > 0 and r1 == 0.0 and r3 == 0.0:
        regime = Regime.MULTI_ARM
    elif r2 <= 0 or p12 <= 0.0:
        regime = Regime.SEPARATE_TRIALS
    elif p22 <= 0.0:
        regime = Regime.ALL_TO_ARM1
    else:
        regime = Regime.INTERIOR
    return _design((r1, r2, r3), p2, regime, mode)


# ---------------------------------------------------------------------------
# integer tables

@dataclass(frozen=True)
class CountsTable:
    """Integer patients per arm and period; rows control/arm1/arm2, columns periods."""

    control: tuple[int, int, int]
    arm1: tuple[int, int, int]
    arm2: tuple[int, int, int]

    @property
    def rows(self) -> tuple[tuple[int, int, int], ...]:
        return (self.control, self.arm1, self.arm2)

    def period_totals(self) -> tuple[int, int, int]:
        return tuple(self.control[s] + self.arm1[s] + self.arm2[s] for s in range(3))

    def total(self) -> int:
        return sum(self.period_totals())


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_periods(r: tuple[float, float, float], total_n: int) -> tuple[int, int, int]:
    """Largest-remainder apportionment of N over periods.

    Remainder ties go to the outer periods first (order 1, 3, 2), matching the
    published splits such as N1 = N3 = 31, N2 = 30 for N = 92 and equal thirds.
    """
    quotas = [ri * total_n for ri in r]
    floors = [math.floor(q + 1e-9) for q in quotas]
    counts = list(map(int, floors))
    leftover = total_n - sum(counts)
    tie_rank = {0: 0, 2: 1, 1: 2}
    order = sorted(range(3), key=lambda s: (-(quotas[s] - floors[s]), tie_rank[s]))
    for i in range(leftover):
        counts[order[i % 3]] += 1
    return tuple(counts)


def round_allocation(plan: AllocationPlan, total_n: int) -> CountsTable:
    """Integer arm-by-period table for the plan at total sample size N.

    Period totals come from largest-remainder apportionment of r*N. Within a
    period each active cell rounds p*N_s half-up independently, which is how
    the published design tables are rounded; a period's cells can therefore
    sum to one more or less than its nominal total.
    """
    plan.validate()
    active_cells = sum(1 for s in range(3) for a in range(3) if plan.p[s][a] > 0)
    if total_n < active_cells:
        raise ValidationError(f"total_n={total_n} below the {active_cells} active cells")
    periods = split_periods(plan.r, total_n)
    table = [[0, 0, 0] for _ in range(3)]  # [arm][period]
    for s in range(3):
        for arm in range(3):
            if plan.p[s][arm] > 0.0 and periods[s] > 0:
                table[arm][s] = _round_half_up(plan.p[s][arm] * periods[s])
    return CountsTable(control=tuple(table[0]), arm1=tuple(table[1]), arm2=tuple(table[2]))


def one_to_one_plan(r: tuple[float, float, float]) -> AllocationPlan:
    """Equal allocation among the arms active in each period."""
    p2 = (1 / 3, 1 / 3, 1 / 3) if r[1] > 0 else None
    return _plan(tuple(r), p2)


def sqrt_k_plan(r: tuple[float, float, float]) -> AllocationPlan:
    """Control gets the sqrt(2) share in period 2; equal splits elsewhere."""
    p2 = (P0_MULTI_ARM, P_ARM_MULTI_ARM, P_ARM_MULTI_ARM) if r[1] > 0 else None
    return _plan(tuple(r), p2)


def design_tables(r: tuple[float, float, float], total_n: int, mode: AnalysisMode,
                  settings: SolverSettings = DEFAULT_SETTINGS) -> dict:
    """Rounded sample-size tables for the one-to-one, sqrt-k, and optimal strategies.

    Period totals are fixed first; the optimal allocation is then re-solved at
    the realized period fractions N_s/N so its cells match what the integer
    partition actually implies.
    """
    mode = AnalysisMode.parse(mode)
    probe = one_to_one_plan(r)
    periods = split_periods(probe.r, total_n)
    realized = tuple(n_s / total_n for n_s in periods)

    if realized[1] > 0:
        if realized[0] == 0.0 and mode is AnalysisMode.WITH_NONCONCURRENT:
            optimal = solve_case1(mode)
        elif mode is AnalysisMode.WITH_NONCONCURRENT:
            optimal = solve_case3_ncc(realized[0], realized[1], settings)
        else:
            optimal = solve_case3_cc(realized[0], realized[1], settings)
        opt_plan = _plan(realized, optimal.plan.p[1] if realized[1] > 0 else None)
    else:
        opt_plan = _plan(realized, None)

    strategies = {
        "one_to_one": one_to_one_plan(realized),
        "sqrt_k": sqrt_k_plan(realized),
        "optimal": opt_plan,
    }
    return {
        "period_totals": periods,
        "realized_r": realized,
        "tables": {name: round_allocation(plan, total_n)
                   for name, plan in strategies.items()},
        "plans": strategies,
    }


def _check_r1(r1: float) -> None:
    if not 0.0 <= r1 <= 1.0:
        raise ValidationError(f"r1 must lie in [0,1], got {r1}")


def _check_r1_r2(r1: float, r2: float) -> None:
    if r1 < 0 or r2 < 0:
        raise ValidationError(f"period fractions must be nonnegative, got ({r1}, {r2})")
    if r1 + r2 > 1.0 + 1e-12:
        raise ValidationError(f"r1 + r2 must be <= 1, got {r1 + r2}")
