"""Intraday non-Gaussianity proxies and their mixture-null calibration."""

__version__ = "0.1.0"

from .estimators import (
    GAUSSIAN,
    DailyStats,
    daily_stats,
    moors_kurtosis,
    normalize_leave_one_out,
    normalize_mean_abs,
    octiles,
    p_half_moment,
    p_kurtosis,
    p_volatility,
    tail_counts,
)
from .market_data import (
    QuoteSeries,
    SessionConfig,
    TradingDay,
    compute_returns,
    filter_short_sessions,
    parse_quotes,
    read_quotes,
    trim_session,
    uniformize_periods,
)
from .simulator import (
    REFERENCE_MODEL,
    MixtureModel,
    SimConfig,
    analytic_excess_kurtosis,
    analytic_moments,
    analytic_p_kurtosis,
    calibrate_mixture,
    regime_scenario,
    run_null_experiment,
    sample_mixture,
)
