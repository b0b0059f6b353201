"""Synthetic loan portfolios, delinquency measures, and recovery timing.

The package generates amortising-loan portfolios under configurable
credit-risk behaviour, measures per-account delinquency three ways, and
finds the loss-minimising threshold at which a lender should intervene.
"""

from .config import ConfigError, ScenarioConfig, load_config
from .delinquency import (
    CdParams,
    DelinquencySeries,
    DodParams,
    Measure,
    SeriesCache,
    cd_series,
    dod_series,
    expected_duration,
    first_reach,
    md_series,
    measure_series,
    repayment_ratio,
)
from .experiments import (
    ScenarioResult,
    SweepCell,
    SweepResult,
    SweepSpec,
    derive_cell_seed,
    emit_results,
    run_loss_rate_sweep,
    run_markov_grid,
    run_payment_prob_sweep,
    run_scenario,
    run_truncation_sweep,
)
from .lossmodel import (
    LossRates,
    LossTable,
    PolicyClassification,
    PortfolioLoss,
    arrears,
    blended_loss,
    classify,
    cum_receipts,
    expected_balance,
    portfolio_loss,
)
from .optimizer import (
    GridOptions,
    LossCurve,
    MeasureComparison,
    ThresholdGrid,
    best_measure,
    build_threshold_grid,
    sweep_loss_curve,
)
from .portfolio import (
    Account,
    LoanSpec,
    Portfolio,
    build_account,
    discount_factor,
    monthly_rate,
    principal_for_instalment,
)
from .simulation import (
    MarkovParams,
    RandomDefaultsParams,
    SeededRng,
    TruncationRule,
    generate_portfolio,
    markov_receipts,
    random_receipts,
    truncate_receipts,
)

__version__ = "0.1.0"

__all__ = [
    "Account",
    "CdParams",
    "ConfigError",
    "DelinquencySeries",
    "DodParams",
    "GridOptions",
    "LoanSpec",
    "LossCurve",
    "LossRates",
    "LossTable",
    "MarkovParams",
    "Measure",
    "MeasureComparison",
    "PolicyClassification",
    "Portfolio",
    "PortfolioLoss",
    "RandomDefaultsParams",
    "ScenarioConfig",
    "ScenarioResult",
    "SeededRng",
    "SeriesCache",
    "SweepCell",
    "SweepResult",
    "SweepSpec",
    "ThresholdGrid",
    "TruncationRule",
    "arrears",
    "best_measure",
    "blended_loss",
    "build_account",
    "build_threshold_grid",
    "cd_series",
    "classify",
    "cum_receipts",
    "derive_cell_seed",
    "discount_factor",
    "dod_series",
    "emit_results",
    "expected_balance",
    "expected_duration",
    "first_reach",
    "generate_portfolio",
    "load_config",
    "markov_receipts",
    "md_series",
    "measure_series",
    "monthly_rate",
    "portfolio_loss",
    "principal_for_instalment",
    "random_receipts",
    "repayment_ratio",
    "run_loss_rate_sweep",
    "run_markov_grid",
    "run_payment_prob_sweep",
    "run_scenario",
    "run_truncation_sweep",
    "sweep_loss_curve",
    "truncate_receipts",
    "__version__",
]
