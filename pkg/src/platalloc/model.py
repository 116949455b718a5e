"""Structural types and variance formulas for the three-period platform trial.

The trial runs in up to three periods with a shared control arm (arm 0) and
two experimental arms. Arm 1 recruits in periods 1-2, arm 2 in periods 2-3.
Everything here is a pure function of the allocation plan: period fractions
``r`` and within-period allocation proportions ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "AllocationPlan",
    "AnalysisMode",
    "SolverError",
    "TrialParams",
    "ValidationError",
    "VarianceProfile",
    "arm_information",
    "max_variance",
    "ncc_information_arm2",
    "rho_two_period",
    "var_cc",
    "var_ncc_arm2",
    "weights_cc",
]

# Arm i recruits in periods ARM_PERIODS[i] (0-based period indices).
ARM_PERIODS = {1: (0, 1), 2: (1, 2)}

_PROB_TOL = 1e-9


class ValidationError(ValueError):
    """Invalid user input: plan, parameters, or request."""


class SolverError(RuntimeError):
    """Numerical solve failed; carries bracket or iteration diagnostics."""


class AnalysisMode(Enum):
    """Which controls feed the arm-2 comparison; arm 1 is always concurrent-only."""

    CONCURRENT_ONLY = "cc"
    WITH_NONCONCURRENT = "ncc"

    @classmethod
    def parse(cls, value: "str | AnalysisMode") -> "AnalysisMode":
        if isinstance(value, AnalysisMode):
            return value
        for mode in cls:
            if mode.value == value:
                return mode
        raise ValidationError(f"unknown analysis mode {value!r}; expected 'cc' or 'ncc'")


@dataclass(frozen=True)
class AllocationPlan:
    """Period fractions r[s] = N_s/N and proportions p[s][i] of period-s patients on arm i.

    Periods are indexed 0..2 (trial periods 1..3); arms are 0 (control), 1, 2.
    Periods with r[s] == 0 carry an all-zero proportion row by convention.
    """

    r: tuple[float, float, float]
    p: tuple[tuple[float, float, float], ...]

    @classmethod
    def make(cls, r, p) -> "AllocationPlan":
        plan = cls(tuple(float(x) for x in r),
                   tuple(tuple(float(x) for x in row) for row in p))
        plan.validate()
        return plan

    def validate(self) -> None:
        if len(self.r) != 3 or len(self.p) != 3 or any(len(row) != 3 for row in self.p):
            raise ValidationError("plan needs 3 period fractions and a 3x3 proportion table")
        if any(x < -_PROB_TOL or x > 1 + _PROB_TOL for x in self.r):
            raise ValidationError(f"period fractions outside [0,1]: {self.r}")
        if abs(sum(self.r) - 1.0) > _PROB_TOL:
            raise ValidationError(f"period fractions must sum to 1, got {sum(self.r)}")
        for s, row in enumerate(self.p):
            if self.r[s] <= _PROB_TOL:
                if any(abs(x) > _PROB_TOL for x in row):
                    raise ValidationError(f"period {s + 1} has zero size but nonzero proportions")
                continue
            if any(x < -_PROB_TOL or x > 1 + _PROB_TOL for x in row):
                raise ValidationError(f"period {s + 1} proportions outside [0,1]: {row}")
            if abs(sum(row) - 1.0) > _PROB_TOL:
                raise ValidationError(f"period {s + 1} proportions must sum to 1, got {row}")
        # arm 2 is absent in period 1, arm 1 in period 3
        if abs(self.p[0][2]) > _PROB_TOL:
            raise ValidationError("arm 2 cannot recruit in period 1")
        if abs(self.p[2][1]) > _PROB_TOL:
            raise ValidationError("arm 1 cannot recruit in period 3")

    def arm_total(self, arm: int) -> float:
        """Fraction of the whole trial allocated to ``arm`` across periods."""
        return sum(self.r[s] * self.p[s][arm] for s in range(3))


@dataclass(frozen=True)
class TrialParams:
    """Total sample size and the (known) outcome standard deviation."""

    total_n: int
    sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.total_n < 1:
            raise ValidationError(f"total_n must be >= 1, got {self.total_n}")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")


@dataclass(frozen=True)
class VarianceProfile:
    """Effect-estimator variances for both arms plus the minimax summary."""

    var1: float
    var2: float
    max_var: float
    ratio_vs_separate: float


def _pair_information(p_arm: float, p_ctrl: float) -> float:
    """Per-patient information of a treatment/control split: p_a*p_0/(p_a+p_0).

    Zero if either share is zero (that period carries no comparison).
    """
    if p_arm <= 0.0 or p_ctrl <= 0.0:
        return 0.0
    return p_arm * p_ctrl / (p_arm + p_ctrl)


def arm_information(plan: AllocationPlan, arm: int) -> float:
    """Dimensionless information of the concurrent-controls stratified estimator.

    This is the bracket whose reciprocal scales sigma^2/N into the variance;
    optimizers work on it directly since the optimum does not depend on N.
    """
    if arm not in ARM_PERIODS:
        raise ValidationError(f"arm must be 1 or 2, got {arm}")
    total = 0.0
    for s in ARM_PERIODS[arm]:
        if plan.r[s] <= 0.0:
            continue
        total += plan.r[s] * _pair_information(plan.p[s][arm], plan.p[s][0])
    return total


def var_cc(plan: AllocationPlan, arm: int, params: TrialParams) -> float:
    """Variance of the stratified treatment-effect estimator using concurrent controls.

    Periods with zero size or zero allocation contribute nothing; if no period
    carries information the variance is +inf.
    """
    plan.validate()
    info = arm_information(plan, arm)
    if info <= 0.0:
        return math.inf
    return params.sigma**2 / (params.total_n * info)


def weights_cc(plan: AllocationPlan, arm: int, params: TrialParams) -> tuple[float, float]:
    """Inverse-variance weights for the arm's two period-wise mean differences.

    A zero-information period gets weight 0; the pair sums to 1.
    """
    plan.validate()
    if arm not in ARM_PERIODS:
        raise ValidationError(f"arm must be 1 or 2, got {arm}")
    infos = []
    for s in ARM_PERIODS[arm]:
        part = plan.r[s] * _pair_information(plan.p[s][arm], plan.p[s][0]) if plan.r[s] > 0 else 0.0
        infos.append(part)
    total = infos[0] + infos[1]
    if total <= 0.0:
        raise ValidationError(f"estimand undefined: arm {arm} has no concurrent information")
    return infos[0] / total, infos[1] / total


def ncc_information_arm2(plan: AllocationPlan) -> float:
    """Information bracket for arm 2 when non-concurrent controls are modeled.

    Equals r3*p23*(1-p23) + r2*(p22*(1-p22) - r2*p12^2*p22^2 / (r1*q11 + r2*q12)),
    with q = p(1-p). When p12 = 0 the borrowing correction vanishes and the
    value reduces to the concurrent-controls bracket for arm 2.
    """
    r1, r2, r3 = plan.r
    p11 = plan.p[0][1]
    p12, p22 = plan.p[1][1], plan.p[1][2]
    p23 = plan.p[2][2]

    period3 = r3 * p23 * (1.0 - p23) if r3 > 0 else 0.0
    if r2 <= 0.0:
        return period3

    q22 = p22 * (1.0 - p22)
    correction = 0.0
    if p12 > 0.0:
        denom = (r1 * p11 * (1.0 - p11) if r1 > 0 else 0.0) + r2 * p12 * (1.0 - p12)
        if denom > 0.0:
            correction = r2 * p12**2 * p22**2 / denom
    return period3 + r2 * (q22 - correction)


def var_ncc_arm2(plan: AllocationPlan, params: TrialParams) -> float:
    """Variance of the arm-2 effect estimator from the all-periods regression model."""
    plan.validate()
    info = ncc_information_arm2(plan)
    if info <= 0.0:
        if plan.arm_total(2) > _PROB_TOL:
            raise ValidationError(
                f"non-concurrent information bracket is {info}; plan is numerically invalid"
            )
        return math.inf
    return params.sigma**2 / (params.total_n * info)


def rho_two_period(n01: float, n02: float, n11: float, n12: float) -> float:
    """Borrowing coefficient of the two-period arm-2 estimator.

    rho = (1/n02) / (1/n01 + 1/n02 + 1/n11 + 1/n12) with all counts positive.
    """
    counts = (n01, n02, n11, n12)
    if any(n <= 0 for n in counts):
        raise ValidationError(f"all four cell counts must be positive, got {counts}")
    denom = sum(1.0 / n for n in counts)
    return (1.0 / n02) / denom


def _separate_trials_max_var(plan: AllocationPlan, params: TrialParams) -> float:
    """Max variance of the reference design: two disjoint 1:1 trials.

    Total N is split between the trials in proportion to the plan's
    experimental-arm column totals, so each arm keeps its column total plus a
    matched control; a 1:1 trial of size M has effect variance 4*sigma^2/M.
    """
    t1 = plan.arm_total(1)
    t2 = plan.arm_total(2)
    if t1 + t2 <= 0.0:
        return math.inf
    worst_share = min(t1, t2) / (t1 + t2)
    if worst_share <= 0.0:
        return math.inf
    return 4.0 * params.sigma**2 / (params.total_n * worst_share)


def max_variance(plan: AllocationPlan, params: TrialParams,
                 mode: AnalysisMode = AnalysisMode.CONCURRENT_ONLY) -> VarianceProfile:
    """Evaluate both arms' variances under ``mode`` and compare to separate trials."""
    plan.validate()
    v1 = var_cc(plan, 1, params)
    if mode is AnalysisMode.WITH_NONCONCURRENT:
        v2 = var_ncc_arm2(plan, params)
    else:
        v2 = var_cc(plan, 2, params)
    worst = max(v1, v2)
    reference = _separate_trials_max_var(plan, params)
    if math.isinf(worst) and math.isinf(reference):
        ratio = math.nan
    else:
        ratio = worst / reference
    return VarianceProfile(var1=v1, var2=v2, max_var=worst, ratio_vs_separate=ratio)
