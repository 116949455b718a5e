"""Monte Carlo engine: generate platform-trial datasets, analyze, aggregate.

Replicate k draws from an independent counter-based substream derived from
(master_seed, k), so results are bit-reproducible for a fixed scenario, rep
count, and seed, no matter how execution is batched or parallelized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy import stats

from .linmod import FitResult, arm1_model, arm2_model, fit_model
from .model import AnalysisMode, ValidationError

__all__ = [
    "ArmSummary",
    "LinearTrend",
    "SimulationScenario",
    "SimulationSummary",
    "StepTrend",
    "TrialDataset",
    "analyze",
    "generate_trial",
    "iter_simulation",
    "replicate_rng",
    "run_simulation",
]


@dataclass(frozen=True)
class LinearTrend:
    """Adds slope * (j / N) to patient j's mean, equally across arms."""

    slope: float


@dataclass(frozen=True)
class StepTrend:
    """Adds a constant per-period shift, equally across arms."""

    shifts: tuple[float, float, float]


@dataclass(frozen=True)
class SimulationScenario:
    counts: tuple[tuple[int, int, int], ...]  # rows control/arm1/arm2, columns periods
    mu0: float
    theta: tuple[float, float]
    sigma: float
    trend: LinearTrend | StepTrend | None = None
    alpha_one_sided: float = 0.025
    ci_level: float = 0.95
    mode: AnalysisMode = AnalysisMode.CONCURRENT_ONLY

    @classmethod
    def make(cls, counts, mu0, theta, sigma, trend=None, alpha_one_sided=0.025,
             ci_level=0.95, mode=AnalysisMode.CONCURRENT_ONLY) -> "SimulationScenario":
        rows = tuple(tuple(int(x) for x in row) for row in counts)
        scenario = cls(counts=rows, mu0=float(mu0),
                       theta=(float(theta[0]), float(theta[1])), sigma=float(sigma),
                       trend=trend, alpha_one_sided=float(alpha_one_sided),
                       ci_level=float(ci_level), mode=AnalysisMode.parse(mode))
        scenario.validate()
        return scenario

    def validate(self) -> None:
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise ValidationError("counts must be a 3x3 arm-by-period table")
        if any(x < 0 for row in self.counts for x in row):
            raise ValidationError("counts must be nonnegative")
        if self.counts[2][0] != 0:
            raise ValidationError("arm 2 cannot have patients in period 1")
        if self.counts[1][2] != 0:
            raise ValidationError("arm 1 cannot have patients in period 3")
        if sum(self.counts[1]) == 0 or sum(self.counts[2]) == 0:
            raise ValidationError("both experimental arms need at least one patient")
        if not self.sigma > 0:
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 < self.alpha_one_sided < 0.5:
            raise ValidationError(f"alpha must lie in (0, 0.5), got {self.alpha_one_sided}")
        if isinstance(self.trend, StepTrend) and len(self.trend.shifts) != 3:
            raise ValidationError("step trend needs one shift per period")

    @property
    def total_n(self) -> int:
        return sum(sum(row) for row in self.counts)

    def period_sizes(self) -> tuple[int, int, int]:
        return tuple(self.counts[0][s] + self.counts[1][s] + self.counts[2][s]
                     for s in range(3))


@dataclass(frozen=True)
class TrialDataset:
    """Per-patient records in enrollment order; periods are 1-based."""

    enrollment_index: np.ndarray
    period: np.ndarray
    arm: np.ndarray
    outcome: np.ndarray

    def __len__(self) -> int:
        return len(self.outcome)


@dataclass(frozen=True)
class ArmSummary:
    rejection_rate: float
    mc_se: float
    ci_width_mean: float
    estimate_mean: float
    estimate_sd: float


@dataclass(frozen=True)
class SimulationSummary:
    reps: int
    seed: int
    alpha_one_sided: float
    ci_level: float
    mode: AnalysisMode
    arms: dict  # {1: ArmSummary, 2: ArmSummary}


def replicate_rng(master_seed: int, k: int) -> np.random.Generator:
    """Counter-based substream for replicate k of a run seeded with master_seed."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(k,))
    return np.random.Generator(np.random.Philox(seq))


def _period_layout(scenario: SimulationScenario):
    """Static enrollment layout: period of each patient and per-period arm templates."""
    sizes = scenario.period_sizes()
    period_of = np.concatenate(
        [np.full(sizes[s], s + 1, dtype=np.int64) for s in range(3)]
    ) if sum(sizes) else np.zeros(0, dtype=np.int64)
    templates = []
    for s in range(3):
        template = np.concatenate([
            np.full(scenario.counts[a][s], a, dtype=np.int64) for a in range(3)
        ]) if sizes[s] else np.zeros(0, dtype=np.int64)
        templates.append(template)
    return sizes, period_of, templates


def _trend_offsets(scenario: SimulationScenario, period_of: np.ndarray) -> np.ndarray:
    n = len(period_of)
    if scenario.trend is None:
        return np.zeros(n)
    if isinstance(scenario.trend, LinearTrend):
        return scenario.trend.slope * (np.arange(1, n + 1) / n)
    if isinstance(scenario.trend, StepTrend):
        shifts = np.asarray(scenario.trend.shifts, dtype=float)
        return shifts[period_of - 1]
    raise ValidationError(f"unknown trend {scenario.trend!r}")


def _draw_arms(scenario: SimulationScenario, rng: np.random.Generator,
               sizes, templates) -> np.ndarray:
    """Arm labels in enrollment order: each period is a fresh random permutation."""
    parts = []
    for s in range(3):
        if sizes[s] == 0:
            continue
        parts.append(templates[s][rng.permutation(sizes[s])])
    return np.concatenate(parts)


def generate_trial(scenario: SimulationScenario,
                   rng: np.random.Generator) -> TrialDataset:
    """One synthetic trial: exact cell counts, random within-period ordering.

    Draw protocol (fixed for reproducibility): one permutation per nonempty
    period in period order, then one standard-normal vector for all patients.
    """
    scenario.validate()
    sizes, period_of, templates = _period_layout(scenario)
    arms = _draw_arms(scenario, rng, sizes, templates)
    n = len(arms)
    means = np.array([scenario.mu0,
                      scenario.mu0 + scenario.theta[0],
                      scenario.mu0 + scenario.theta[1]])
    eps = rng.standard_normal(n) * scenario.sigma
    outcome = means[arms] + _trend_offsets(scenario, period_of) + eps
    return TrialDataset(enrollment_index=np.arange(1, n + 1),
                        period=period_of, arm=arms, outcome=outcome)


def analyze(dataset: TrialDataset, mode: AnalysisMode,
            alpha: float = 0.025, level: float = 0.95,
            use_t: bool = True) -> dict[int, FitResult]:
    """Fit both arms' models on one dataset; arm 1 is concurrent-only always."""
    mode = AnalysisMode.parse(mode)
    return {
        1: fit_model(dataset, arm1_model(mode), level=level, use_t=use_t),
        2: fit_model(dataset, arm2_model(mode), level=level, use_t=use_t),
    }


# ---------------------------------------------------------------------------
# batched engine

class _BatchModel:
    """Precomputed least-squares pieces for one model spec on a fixed counts table.

    Rows never change across replicates, only outcomes do, so X'X is constant
    and X'y reduces to a pattern-weighted combination of per-cell outcome sums.
    """

    def __init__(self, scenario, spec, cells, cell_counts):
        include = [i for i, (a, s) in enumerate(cells)
                   if s in spec.periods and a in spec.arms]
        self.cell_mask = np.zeros(len(cells), dtype=bool)
        self.cell_mask[include] = True

        names = ["intercept"]
        names += [f"arm{a}" for a in (1, 2) if a in spec.arms]
        names += [f"period{s}" for s in spec.period_effects]

        def pattern_row(a, s):
            row = [1.0]
            row += [1.0 if a == arm else 0.0 for arm in (1, 2) if arm in spec.arms]
            row += [1.0 if s == q else 0.0 for q in spec.period_effects]
            return row

        full = np.zeros((len(cells), len(names)))
        for i in include:
            a, s = cells[i]
            full[i] = pattern_row(a, s)

        weighted = (full * cell_counts[:, None]).sum(axis=0)
        included_n = cell_counts[self.cell_mask].sum()
        present = weighted > 0
        for j, name in enumerate(names):
            # period indicators confounded with the intercept get dropped too
            if name.startswith("period") and weighted[j] >= included_n:
                present[j] = False
        present[0] = True
        self.columns = tuple(n for n, keep in zip(names, present) if keep)
        self.dropped = tuple(n for n, keep in zip(names, present) if not keep)
        self.pattern = full[:, present]

        target = f"arm{spec.target_arm}"
        if target not in self.columns:
            raise ValidationError(f"target {target} has no observations in the fitted data")
        self.target_index = self.columns.index(target)

        xtx = (self.pattern * cell_counts[:, None]).T @ self.pattern
        self.xtx_inv = np.linalg.inv(xtx)
        self.n_obs = int(cell_counts[self.cell_mask].sum())
        self.df = self.n_obs - len(self.columns)
        if self.df <= 0:
            raise ValidationError("model has no residual degrees of freedom")

    def fit_batch(self, cell_sums, cell_sqsums, alpha, level, use_t):
        """Per-replicate estimate, rejection flag, and CI width from cell sums."""
        s = cell_sums[:, self.cell_mask]
        s2 = cell_sqsums[:, self.cell_mask]
        pat = self.pattern[self.cell_mask]

        b = s.shape[0]
        k = pat.shape[1]
        xty = np.zeros((b, k))
        for c in range(pat.shape[0]):   # few cells; keeps reductions deterministic
            xty += s[:, c, None] * pat[c]
        beta = xty @ self.xtx_inv.T
        rss = s2.sum(axis=1) - (beta * xty).sum(axis=1)
        sigma2 = np.maximum(rss, 0.0) / self.df
        se = np.sqrt(sigma2 * self.xtx_inv[self.target_index, self.target_index])

        est = beta[:, self.target_index]
        with np.errstate(divide="ignore", invalid="ignore"):
            tstat = np.where(se > 0, est / np.maximum(se, 1e-300), np.inf)
        if use_t:
            crit_test = stats.t.ppf(1.0 - alpha, self.df)
            crit_ci = stats.t.ppf(0.5 + level / 2.0, self.df)
        else:
            crit_test = stats.norm.ppf(1.0 - alpha)
            crit_ci = stats.norm.ppf(0.5 + level / 2.0)
        return est, tstat > crit_test, 2.0 * crit_ci * se


def iter_simulation(scenario: SimulationScenario, reps: int, master_seed: int,
                    batch_size: int = 4096, use_t: bool = True) -> Iterator[tuple]:
    """Yield ("progress", done, reps) events, then ("result", SimulationSummary).

    The final summary is independent of batch_size: replicate k always uses
    the substream (master_seed, k) and aggregation is order-insensitive.
    """
    scenario.validate()
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")

    sizes, period_of, templates = _period_layout(scenario)
    n = int(sum(sizes))
    cells = [(a, s + 1) for s in range(3) for a in range(3)
             if scenario.counts[a][s] > 0]
    cell_counts = np.array([scenario.counts[a][s - 1] for a, s in cells], dtype=float)
    cell_lookup = np.full((3, 4), -1, dtype=np.int64)
    for i, (a, s) in enumerate(cells):
        cell_lookup[a, s] = i

    models = {
        1: _BatchModel(scenario, arm1_model(scenario.mode), cells, cell_counts),
        2: _BatchModel(scenario, arm2_model(scenario.mode), cells, cell_counts),
    }

    means = np.array([scenario.mu0,
                      scenario.mu0 + scenario.theta[0],
                      scenario.mu0 + scenario.theta[1]])
    trend = _trend_offsets(scenario, period_of)

    est = {a: np.empty(reps) for a in (1, 2)}
    rej = {a: np.empty(reps, dtype=bool) for a in (1, 2)}
    width = {a: np.empty(reps) for a in (1, 2)}

    done = 0
    while done < reps:
        b = min(batch_size, reps - done)
        arms = np.empty((b, n), dtype=np.int64)
        eps = np.empty((b, n))
        for j in range(b):
            rng = replicate_rng(master_seed, done + j)
            arms[j] = _draw_arms(scenario, rng, sizes, templates)
            eps[j] = rng.standard_normal(n)
        y = means[arms] + trend[None, :] + eps * scenario.sigma

        cell_of = cell_lookup[arms, period_of[None, :]]
        rows = np.repeat(np.arange(b), n)
        cell_sums = np.zeros((b, len(cells)))
        cell_sqsums = np.zeros((b, len(cells)))
        np.add.at(cell_sums, (rows, cell_of.ravel()), y.ravel())
        np.add.at(cell_sqsums, (rows, cell_of.ravel()), (y * y).ravel())

        for a in (1, 2):
            e, r, w = models[a].fit_batch(cell_sums, cell_sqsums,
                                          scenario.alpha_one_sided,
                                          scenario.ci_level, use_t)
            est[a][done:done + b] = e
            rej[a][done:done + b] = r
            width[a][done:done + b] = w

        done += b
        yield ("progress", done, reps)

    summaries = {}
    for a in (1, 2):
        rate = float(rej[a].mean())
        summaries[a] = ArmSummary(
            rejection_rate=rate,
            mc_se=math.sqrt(rate * (1.0 - rate) / reps),
            ci_width_mean=float(width[a].mean()),
            estimate_mean=float(est[a].mean()),
            estimate_sd=float(est[a].std(ddof=1)) if reps > 1 else 0.0,
        )
    yield ("result", SimulationSummary(reps=reps, seed=master_seed,
                                       alpha_one_sided=scenario.alpha_one_sided,
                                       ci_level=scenario.ci_level,
                                       mode=scenario.mode, arms=summaries))


def run_simulation(scenario: SimulationScenario, reps: int, master_seed: int,
                   batch_size: int = 4096, use_t: bool = True) -> SimulationSummary:
    """Run the full Monte Carlo and return the aggregate summary."""
    result = None
    for event in iter_simulation(scenario, reps, master_seed, batch_size, use_t):
        if event[0] == "result":
            result = event[1]
    return result
