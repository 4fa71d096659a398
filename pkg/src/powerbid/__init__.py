"""Agent-based electricity market simulator with learned bidding strategies.

Producers bid hourly into a uniform-price day-ahead auction.  Learning
producers fit support-vector regressors to recent market outcomes, either to
forecast the clearing price directly or to search for the surplus-maximizing
bid.  The package provides the regression engine, the auction clearing rule,
the forecasting layer, the bidding strategies, and the simulation protocol
that ties them together, plus CSV/SVG reporting and a small CLI.
"""

from .clearing import Bid, ClearingResult, clear, producer_surplus
from .config import ConfigError, config_hash, load_config
from .forecasting import (
    ForecastErrorStats,
    HourRecord,
    MarketHistory,
    build_price_dataset,
    build_surplus_dataset,
    forecast_price,
    update_error_stats,
)
from .simulation import (
    LoadProfileSpec,
    Producer,
    ScenarioConfig,
    ScenarioReport,
    TrainingConfig,
    aggregate_surplus,
    daily_average_price,
    generate_load,
    hhi,
    run_scenario,
)
from .strategies import (
    BidDecision,
    MarginalCostBidding,
    PriceForecastBidding,
    RandomBidding,
    SurplusForecastBidding,
    bid_marginal_cost,
    bid_price_forecast,
    bid_random,
    bid_surplus_forecast,
    normal_quantile,
)
from .svr import (
    FeatureScaler,
    KernelSpec,
    SvrConvergenceError,
    SvrHyperparams,
    SvrModel,
    TrainingSet,
    fit_scaler,
    kernel_eval,
    kkt_residual,
    predict,
    predict_batch,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Bid",
    "BidDecision",
    "ClearingResult",
    "ConfigError",
    "FeatureScaler",
    "ForecastErrorStats",
    "HourRecord",
    "KernelSpec",
    "LoadProfileSpec",
    "MarginalCostBidding",
    "MarketHistory",
    "PriceForecastBidding",
    "Producer",
    "RandomBidding",
    "ScenarioConfig",
    "ScenarioReport",
    "SurplusForecastBidding",
    "SvrConvergenceError",
    "SvrHyperparams",
    "SvrModel",
    "TrainingConfig",
    "TrainingSet",
    "aggregate_surplus",
    "bid_marginal_cost",
    "bid_price_forecast",
    "bid_random",
    "bid_surplus_forecast",
    "build_price_dataset",
    "build_surplus_dataset",
    "clear",
    "config_hash",
    "daily_average_price",
    "fit_scaler",
    "forecast_price",
    "generate_load",
    "hhi",
    "kernel_eval",
    "kkt_residual",
    "load_config",
    "predict",
    "predict_batch",
    "producer_surplus",
    "run_scenario",
    "train",
    "update_error_stats",
]
