"""Period-adjusted linear models: design matrices, least squares, stratified estimates.

Each experimental arm is tested against the shared control through a linear
model with treatment indicators and period-effect indicators. The period
columns absorb any additive shift common to all arms within a period, which
is what makes the estimators unbiased under equal time trends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .model import AnalysisMode, ValidationError

__all__ = [
    "DesignData",
    "FitResult",
    "ModelSpec",
    "arm1_model",
    "arm2_model",
    "build_design",
    "fit_model",
    "ols_fit",
    "stratified_estimate",
]


@dataclass(frozen=True)
class ModelSpec:
    """Which rows enter the fit and which indicator columns the model carries."""

    target_arm: int
    mode: AnalysisMode
    periods: tuple[int, ...]          # trial periods (1-based) included
    arms: tuple[int, ...]             # arms included
    period_effects: tuple[int, ...]   # periods getting an indicator column


def arm1_model(mode: AnalysisMode = AnalysisMode.CONCURRENT_ONLY) -> ModelSpec:
    """Arm 1 is always evaluated on its concurrent periods 1-2."""
    return ModelSpec(target_arm=1, mode=AnalysisMode.parse(mode),
                     periods=(1, 2), arms=(0, 1, 2), period_effects=(2,))


def arm2_model(mode: AnalysisMode = AnalysisMode.CONCURRENT_ONLY) -> ModelSpec:
    """Arm 2 uses periods 2-3 (concurrent) or all three periods (with borrowing)."""
    mode = AnalysisMode.parse(mode)
    if mode is AnalysisMode.WITH_NONCONCURRENT:
        return ModelSpec(target_arm=2, mode=mode, periods=(1, 2, 3),
                         arms=(0, 1, 2), period_effects=(2, 3))
    return ModelSpec(target_arm=2, mode=mode, periods=(2, 3),
                     arms=(0, 1, 2), period_effects=(3,))


@dataclass(frozen=True)
class DesignData:
    matrix: np.ndarray
    response: np.ndarray
    columns: tuple[str, ...]
    dropped: tuple[str, ...]
    target_column: str


@dataclass(frozen=True)
class FitResult:
    estimates: dict
    se: dict
    p_one_sided: float
    ci: tuple[float, float]
    residual_df: int
    sigma_hat: float
    target: str
    dropped: tuple[str, ...]

    @property
    def estimate(self) -> float:
        return self.estimates[self.target]

    @property
    def stderr(self) -> float:
        return self.se[self.target]

    @property
    def ci_width(self) -> float:
        return self.ci[1] - self.ci[0]


def build_design(dataset, spec: ModelSpec) -> DesignData:
    """Assemble the indicator design matrix and response for a model spec.

    Columns that are identically zero on the included rows (an arm or period
    absent from the data) are dropped and recorded, so boundary designs with
    empty cells stay analyzable.
    """
    period = np.asarray(dataset.period)
    arm = np.asarray(dataset.arm)
    outcome = np.asarray(dataset.outcome, dtype=float)

    keep = np.isin(period, spec.periods) & np.isin(arm, spec.arms)
    if not keep.any():
        raise ValidationError("model spec selects no observations")
    period = period[keep]
    arm = arm[keep]
    y = outcome[keep]

    columns = [("intercept", np.ones(y.shape[0]))]
    for a in (1, 2):
        if a in spec.arms:
            columns.append((f"arm{a}", (arm == a).astype(float)))
    for s in spec.period_effects:
        columns.append((f"period{s}", (period == s).astype(float)))

    kept, dropped = [], []
    for name, col in columns:
        if name != "intercept" and not col.any():
            dropped.append(name)
        elif name.startswith("period") and col.all():
            # a period holding all included data is confounded with the intercept
            dropped.append(name)
        else:
            kept.append((name, col))

    target = f"arm{spec.target_arm}"
    if target in dropped or target not in [n for n, _ in kept]:
        raise ValidationError(f"target {target} has no observations in the fitted data")

    X = np.column_stack([col for _, col in kept])
    return DesignData(matrix=X, response=y,
                      columns=tuple(n for n, _ in kept),
                      dropped=tuple(dropped), target_column=target)


def ols_fit(design: DesignData, level: float = 0.95, alpha: float | None = None,
            use_t: bool = True) -> FitResult:
    """Least squares with a one-sided test of the target coefficient.

    The one-sided p-value tests H: theta <= 0. With ``use_t`` (default) the
    residual-df t distribution is used; ``use_t=False`` gives the known-sigma
    style z test with sigma still estimated from residuals.
    """
    X, y = design.matrix, design.response
    n, k = X.shape
    if n <= k:
        raise ValidationError(f"need more observations ({n}) than columns ({k})")

    xtx = X.T @ X
    if np.linalg.matrix_rank(xtx) < k:
        with np.errstate(invalid="ignore", divide="ignore"):
            corr = np.corrcoef(X.T)
        pairs = [
            (design.columns[i], design.columns[j])
            for i in range(k) for j in range(i + 1, k)
            if abs(corr[i, j]) > 1 - 1e-10
        ]
        raise ValidationError(f"design matrix is rank deficient; collinear columns: {pairs}")

    xtx_inv = np.linalg.inv(xtx)
    beta = xtx_inv @ (X.T @ y)
    resid = y - X @ beta
    df = n - k
    sigma2 = float(resid @ resid) / df
    ses = np.sqrt(sigma2 * np.diag(xtx_inv))

    j = design.columns.index(design.target_column)
    tstat = beta[j] / ses[j]
    if use_t:
        p_one = float(stats.t.sf(tstat, df))
        crit = float(stats.t.ppf(0.5 + level / 2.0, df))
    else:
        p_one = float(stats.norm.sf(tstat))
        crit = float(stats.norm.ppf(0.5 + level / 2.0))
    ci = (float(beta[j] - crit * ses[j]), float(beta[j] + crit * ses[j]))

    return FitResult(
        estimates={name: float(b) for name, b in zip(design.columns, beta)},
        se={name: float(s) for name, s in zip(design.columns, ses)},
        p_one_sided=p_one,
        ci=ci,
        residual_df=df,
        sigma_hat=math.sqrt(sigma2),
        target=design.target_column,
        dropped=design.dropped,
    )


def fit_model(dataset, spec: ModelSpec, level: float = 0.95,
              use_t: bool = True) -> FitResult:
    return ols_fit(build_design(dataset, spec), level=level, use_t=use_t)


def stratified_estimate(dataset, arm: int, sigma: float = 1.0) -> tuple[float, float]:
    """Inverse-variance weighted per-period mean differences and their variance.

    Weights come from the realized cell counts; the variance plugs the given
    sigma into the per-period variances (design-stage known-sigma convention).
    """
    if arm not in (1, 2):
        raise ValidationError(f"arm must be 1 or 2, got {arm}")
    periods = (1, 2) if arm == 1 else (2, 3)
    period_arr = np.asarray(dataset.period)
    arm_arr = np.asarray(dataset.arm)
    y = np.asarray(dataset.outcome, dtype=float)

    diffs, infos = [], []
    for s in periods:
        trt = y[(period_arr == s) & (arm_arr == arm)]
        ctl = y[(period_arr == s) & (arm_arr == 0)]
        if len(trt) == 0 or len(ctl) == 0:
            continue
        diffs.append(trt.mean() - ctl.mean())
        infos.append(1.0 / (1.0 / len(trt) + 1.0 / len(ctl)))

    if not infos:
        raise ValidationError(f"arm {arm} has no period with concurrent controls")
    total_info = sum(infos)
    estimate = sum(w * d for w, d in zip(infos, diffs)) / total_info
    variance = sigma**2 / total_info
    return float(estimate), float(variance)
