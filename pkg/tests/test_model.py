"""Variance formulas, weights, and profile behavior of the core trial model."""

import math

import numpy as np
import pytest

from platalloc import (
    AllocationPlan,
    AnalysisMode,
    TrialParams,
    ValidationError,
    max_variance,
    rho_two_period,
    var_cc,
    var_ncc_arm2,
    weights_cc,
)
from platalloc.model import arm_information, ncc_information_arm2

SQ2 = math.sqrt(2.0)
P0_STAR = 1.0 / (1.0 + SQ2)
P_STAR = 1.0 - 1.0 / SQ2


def plan_single_period_arm1():
    return AllocationPlan.make((1.0, 0.0, 0.0),
                               ((0.5, 0.5, 0.0), (0, 0, 0), (0, 0, 0)))


def plan_multi_arm(p0=P0_STAR, p1=P_STAR, p2=P_STAR):
    return AllocationPlan.make((0.0, 1.0, 0.0),
                               ((0, 0, 0), (p0, p1, p2), (0, 0, 0)))


def plan_three_equal():
    return AllocationPlan.make(
        (1 / 3, 1 / 3, 1 / 3),
        ((0.5, 0.5, 0.0), (1 / 3, 1 / 3, 1 / 3), (0.5, 0.0, 0.5)))


def random_integer_plan(rng, allow_zero_p12=False):
    """Plan whose cells are exact fractions of integer counts (all cells active)."""
    c = rng.integers(2, 40, size=7)  # n01 n11 | n02 n12 n22 | n03 n23
    if allow_zero_p12 and rng.random() < 0.3:
        c[3] = 0
    n1 = c[0] + c[1]
    n2 = c[2] + c[3] + c[4]
    n3 = c[5] + c[6]
    n = n1 + n2 + n3
    return AllocationPlan.make(
        (n1 / n, n2 / n, n3 / n),
        ((c[0] / n1, c[1] / n1, 0.0),
         (c[2] / n2, c[3] / n2, c[4] / n2),
         (c[5] / n3, 0.0, c[6] / n3))), int(n)


class TestVarCC:
    def test_single_period_equal_split_is_two_sample_variance(self):
        # difference of two means of N/2 patients each
        params = TrialParams(total_n=80, sigma=2.0)
        assert var_cc(plan_single_period_arm1(), 1, params) == pytest.approx(
            4 * 2.0**2 / 80, rel=1e-14)

    def test_multi_arm_sqrt2_value(self):
        params = TrialParams(total_n=92, sigma=1.0)
        got = var_cc(plan_multi_arm(), 1, params)
        # independent direct evaluation of the information term
        info = P_STAR * P0_STAR / (P_STAR + P0_STAR)
        assert got == pytest.approx(1.0 / (92 * info), rel=1e-12)

    def test_zero_allocation_period_contributes_nothing(self):
        with_zero = AllocationPlan.make(
            (0.5, 0.5, 0.0),
            ((0.5, 0.5, 0.0), (0.5, 0.0, 0.5), (0, 0, 0)))
        only_first = AllocationPlan.make(
            (0.5, 0.0, 0.5),
            ((0.5, 0.5, 0.0), (0, 0, 0), (0.5, 0.0, 0.5)))
        params = TrialParams(total_n=100)
        assert var_cc(with_zero, 1, params) == pytest.approx(
            var_cc(only_first, 1, params), rel=1e-14)

    def test_no_information_gives_infinity(self):
        empty2 = AllocationPlan.make(
            (1.0, 0.0, 0.0), ((0.5, 0.5, 0.0), (0, 0, 0), (0, 0, 0)))
        assert math.isinf(var_cc(empty2, 2, TrialParams(10)))

    def test_invalid_plan_rejected(self):
        with pytest.raises(ValidationError):
            AllocationPlan.make((0.5, 0.6, 0.0),
                                ((0.5, 0.5, 0), (1 / 3,) * 3, (0, 0, 0)))
        with pytest.raises(ValidationError):
            AllocationPlan.make((0.5, 0.5, 0.0),
                                ((0.5, 0.3, 0.2), (1 / 3,) * 3, (0, 0, 0)))
        with pytest.raises(ValidationError):  # arm 1 in period 3
            AllocationPlan.make((0.5, 0.0, 0.5),
                                ((0.5, 0.5, 0), (0, 0, 0), (0.5, 0.25, 0.25)))


class TestWeights:
    def test_equal_cells_split_evenly(self):
        plan = AllocationPlan.make(
            (0.5, 0.5, 0.0),
            ((0.5, 0.5, 0.0), (0.5, 0.5, 0.0), (0, 0, 0)))
        w = weights_cc(plan, 1, TrialParams(100))
        assert w == pytest.approx((0.5, 0.5), abs=1e-14)

    def test_double_sized_second_period_gets_two_thirds(self):
        plan = AllocationPlan.make(
            (1 / 3, 2 / 3, 0.0),
            ((0.5, 0.5, 0.0), (0.5, 0.5, 0.0), (0, 0, 0)))
        w = weights_cc(plan, 1, TrialParams(90))
        assert w == pytest.approx((1 / 3, 2 / 3), rel=1e-12)

    def test_weighted_variance_identity_reproduces_var_cc(self):
        # sum_s w_s^2 sigma_s^2 must equal (sum_s 1/sigma_s^2)^(-1) = var_cc
        from platalloc import solve_case2_cc
        design = solve_case2_cc(0.25)
        plan = design.plan
        params = TrialParams(total_n=92, sigma=1.3)
        for arm, periods in ((1, (0, 1)), (2, (1, 2))):
            w = weights_cc(plan, arm, params)
            sig2 = []
            for s in periods:
                n_arm = params.total_n * plan.r[s] * plan.p[s][arm]
                n_ctl = params.total_n * plan.r[s] * plan.p[s][0]
                sig2.append(
                    params.sigma**2 * (1 / n_arm + 1 / n_ctl)
                    if n_arm > 0 and n_ctl > 0 else math.inf)
            combined = sum(wi**2 * s2 for wi, s2 in zip(w, sig2) if wi > 0)
            assert combined == pytest.approx(var_cc(plan, arm, params), rel=1e-10)

    def test_weights_sum_to_one_across_random_plans(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            plan, _ = random_integer_plan(rng)
            for arm in (1, 2):
                w = weights_cc(plan, arm, TrialParams(50))
                assert abs(w[0] + w[1] - 1.0) <= 1e-12

    def test_no_information_raises(self):
        plan = AllocationPlan.make(
            (1.0, 0.0, 0.0), ((0.5, 0.5, 0.0), (0, 0, 0), (0, 0, 0)))
        with pytest.raises(ValidationError, match="estimand undefined"):
            weights_cc(plan, 2, TrialParams(10))


def _ols_variance_arm2(counts, sigma=1.0):
    """Independent oracle: coefficient variance from the all-periods design matrix.

    counts is a 3x3 arm-by-period integer table. Builds the full regression
    design (intercept, arm indicators, period indicators for nonempty periods
    2 and 3) row by row and reads off the arm-2 diagonal of sigma^2 (X'X)^-1.
    """
    rows = []
    for s in range(3):
        for arm in range(3):
            rows += [(arm, s)] * counts[arm][s]
    period_cols = [s for s in (1, 2) if sum(counts[a][s] for a in range(3)) > 0]
    x = []
    for arm, s in rows:
        x.append([1.0, float(arm == 1), float(arm == 2)]
                 + [float(s == q) for q in period_cols])
    x = np.array(x)
    cov = np.linalg.inv(x.T @ x)
    return sigma**2 * cov[2, 2]


class TestVarNCC:
    def test_reduces_to_concurrent_when_arm1_absent_in_period2(self):
        plan = AllocationPlan.make(
            (0.25, 0.5, 0.25),
            ((0.5, 0.5, 0.0), (0.45, 0.0, 0.55), (0.5, 0.0, 0.5)))
        params = TrialParams(total_n=80)
        assert var_ncc_arm2(plan, params) == pytest.approx(
            var_cc(plan, 2, params), rel=1e-12)

    def test_matches_ols_covariance_oracle_equal_thirds(self):
        counts = [[15, 10, 15], [15, 10, 0], [0, 10, 15]]
        n = 90
        plan = AllocationPlan.make(
            (1 / 3, 1 / 3, 1 / 3),
            ((0.5, 0.5, 0.0), (1 / 3, 1 / 3, 1 / 3), (0.5, 0.0, 0.5)))
        got = var_ncc_arm2(plan, TrialParams(n))
        assert got == pytest.approx(_ols_variance_arm2(counts), rel=1e-10)

    def test_matches_ols_covariance_on_random_integer_plans(self):
        rng = np.random.default_rng(2024)
        for _ in range(60):
            plan, n = random_integer_plan(rng, allow_zero_p12=True)
            counts = [[round(plan.r[s] * n * plan.p[s][a]) for s in range(3)]
                      for a in range(3)]
            got = var_ncc_arm2(plan, TrialParams(n))
            want = _ols_variance_arm2(counts)
            assert got == pytest.approx(want, rel=1e-8)

    def test_never_worse_than_concurrent(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            plan, n = random_integer_plan(rng, allow_zero_p12=True)
            params = TrialParams(n)
            assert var_ncc_arm2(plan, params) <= var_cc(plan, 2, params) + 1e-12


class TestRhoTwoPeriod:
    def test_equal_counts_give_quarter(self):
        assert rho_two_period(12, 12, 12, 12) == pytest.approx(0.25, abs=1e-15)

    def test_limit_when_first_control_cell_grows(self):
        want = (1 / 17) / (1 / 17 + 1 / 16 + 1 / 8)
        got = rho_two_period(10**12, 17, 16, 8)
        assert got == pytest.approx(want, rel=1e-9)

    def test_zero_count_rejected(self):
        with pytest.raises(ValidationError):
            rho_two_period(0, 17, 16, 8)

    def test_consistent_with_two_period_variance_formula(self):
        # rho-form variance must agree with the borrowing bracket at r3 = 0
        n01, n02, n11, n12, n22 = 16, 17, 16, 8, 20
        n = n01 + n11 + n02 + n12 + n22
        n1, n2 = n01 + n11, n02 + n12 + n22
        plan = AllocationPlan.make(
            (n1 / n, n2 / n, 0.0),
            ((n01 / n1, n11 / n1, 0.0), (n02 / n2, n12 / n2, n22 / n2), (0, 0, 0)))
        rho = rho_two_period(n01, n02, n11, n12)
        inv_sum = 1 / n01 + 1 / n02 + 1 / n11 + 1 / n12
        var_rho = (1 / n22 + 1 / n02) + rho**2 * inv_sum - 2 * rho / n02
        assert var_ncc_arm2(plan, TrialParams(n)) == pytest.approx(var_rho, rel=1e-12)


class TestMaxVariance:
    def test_multi_arm_optimum_has_equal_variances(self):
        profile = max_variance(plan_multi_arm(), TrialParams(92),
                               AnalysisMode.CONCURRENT_ONLY)
        assert profile.var1 == pytest.approx(profile.var2, rel=1e-12)
        assert profile.max_var == max(profile.var1, profile.var2)

    def test_nonconcurrent_profile_never_larger(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            plan, n = random_integer_plan(rng)
            params = TrialParams(n)
            cc = max_variance(plan, params, AnalysisMode.CONCURRENT_ONLY)
            ncc = max_variance(plan, params, AnalysisMode.WITH_NONCONCURRENT)
            assert ncc.max_var <= cc.max_var + 1e-12

    def test_sharing_beats_separate_trials(self):
        from platalloc import solve_case2_cc
        design = solve_case2_cc(0.25)
        profile = max_variance(design.plan, TrialParams(92))
        assert profile.ratio_vs_separate < 1.0

    def test_separate_trials_plan_has_ratio_one(self):
        plan = AllocationPlan.make(
            (0.6, 0.0, 0.4), ((0.5, 0.5, 0.0), (0, 0, 0), (0.5, 0.0, 0.5)))
        profile = max_variance(plan, TrialParams(100))
        assert profile.ratio_vs_separate == pytest.approx(1.0, rel=1e-12)

    def test_scale_laws_exact(self):
        plan = plan_three_equal()
        base = max_variance(plan, TrialParams(90, sigma=1.0))
        bigger_n = max_variance(plan, TrialParams(270, sigma=1.0))
        assert bigger_n.var1 == pytest.approx(base.var1 / 3, rel=1e-14)
        assert bigger_n.var2 == pytest.approx(base.var2 / 3, rel=1e-14)
        scaled_sigma = max_variance(plan, TrialParams(90, sigma=2.0))
        assert scaled_sigma.var1 == pytest.approx(4 * base.var1, rel=1e-14)
        assert scaled_sigma.var2 == pytest.approx(4 * base.var2, rel=1e-14)


class TestInformationAccessors:
    def test_information_is_n_and_sigma_free(self):
        plan = plan_three_equal()
        info1 = arm_information(plan, 1)
        info2 = ncc_information_arm2(plan)
        for n, sigma in ((10, 1.0), (1000, 3.5)):
            params = TrialParams(n, sigma)
            assert var_cc(plan, 1, params) == pytest.approx(
                sigma**2 / (n * info1), rel=1e-14)
            assert var_ncc_arm2(plan, params) == pytest.approx(
                sigma**2 / (n * info2), rel=1e-14)
