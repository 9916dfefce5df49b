"""Python access to the factor zoo toolkit.

The heavy lifting happens in the compiled ``_core`` module; this package
re-exports it.
"""

from ._core import (
    ConfigError,
    DataError,
    Panel,
    beta_hedge,
    compute_pnl,
    diff_sharpe_drop_data,
    discount_ratio,
    generate_market,
    holding_period,
    load_panel,
    ols,
    overfit_experiment,
    quantile_weights,
    rank_weights,
    realized_beta,
    run_pipeline,
    save_panel,
    sharpe,
    size_adjust_simple,
    size_adjust_two_step,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Panel",
    "beta_hedge",
    "compute_pnl",
    "diff_sharpe_drop_data",
    "discount_ratio",
    "generate_market",
    "holding_period",
    "load_panel",
    "ols",
    "overfit_experiment",
    "quantile_weights",
    "rank_weights",
    "realized_beta",
    "run_pipeline",
    "save_panel",
    "sharpe",
    "size_adjust_simple",
    "size_adjust_two_step",
]
