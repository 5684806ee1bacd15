"""Private publishing of histograms that answer range sums."""

from ._dphist import (
    BudgetExceededError,
    ConfigError,
    GuardError,
    Structure,
    generate,
    group_squared_optimal,
    lpa,
    mse_experiment,
    prefix_sums,
    range_sum,
    run_scheme,
    schemes,
)

__all__ = [
    "BudgetExceededError",
    "ConfigError",
    "GuardError",
    "Structure",
    "generate",
    "group_squared_optimal",
    "lpa",
    "mse_experiment",
    "prefix_sums",
    "range_sum",
    "run_scheme",
    "schemes",
]
