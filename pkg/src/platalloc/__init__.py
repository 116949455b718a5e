"""Optimal patient allocation for three-period platform trials with a shared control.

Solvers for the minimax-variance allocation problem (with or without
non-concurrent controls), period-adjusted regression analysis, and a
reproducible Monte Carlo simulator to verify power and type-1 error.
"""

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
    rho_two_period,
    var_cc,
    var_ncc_arm2,
    weights_cc,
)
from .solver import (
    CountsTable,
    DesignCase,
    OptimalDesign,
    Regime,
    SolverSettings,
    design_tables,
    min_sample_size,
    oracle_grid_search,
    round_allocation,
    solve,
    solve_case1,
    solve_case2_cc,
    solve_case2_ncc,
    solve_case3_cc,
    solve_case3_ncc,
)
from .linmod import (
    FitResult,
    ModelSpec,
    arm1_model,
    arm2_model,
    build_design,
    fit_model,
    ols_fit,
    stratified_estimate,
)
from .simulate import (
    LinearTrend,
    SimulationScenario,
    SimulationSummary,
    StepTrend,
    TrialDataset,
    analyze,
    generate_trial,
    replicate_rng,
    run_simulation,
)

__version__ = "0.1.0"
