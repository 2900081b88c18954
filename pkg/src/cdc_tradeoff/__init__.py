"""Coded distributed computing: bit-exact shuffle simulation and
communication/computation trade-off curves in exact arithmetic."""

from .analysis import (
    cdc_fit,
    cdc_min_computation,
    figure1_series,
    figure2_series,
    figure3_series,
    naive_computation,
    optimal_comm_load,
    per_server_min_computation,
)
from .core import (
    ClusterConfig,
    ConfigError,
    DivisibilityError,
    RangeError,
    binomial,
    subsets_of_size,
    validate_config,
)
from .lp import (
    BudgetInfeasible,
    Infeasible,
    LpSolution,
    RoundedPlan,
    Unbounded,
    lower_bound,
    round_plan,
    scdc_optimize,
    solve_small_lp,
    split_costs,
)
from .placement import Placement, assign_functions, place_files
from .simulator import (
    IVId,
    MissingSideInformation,
    VerificationFailure,
    cdc_shuffle,
    exchange_set,
    map_oracle,
    measure_loads,
    minimum_computation_plan,
    reduce_verify,
    scdc_shuffle,
)

__version__ = "0.1.0"
