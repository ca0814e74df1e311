"""Crash detection and correlation-network analysis for daily price panels.

Thin numpy-facing wrapper around the C++ core. Mode matrices have one row
per mode (highest frequency first); price and return matrices have one row
per day.
"""

from crashnet._core import (
    ConfigError,
    DataError,
    Error,
    NumericError,
    __version__,
    analytic_signal,
    daily_returns,
    decompose,
    detect_crashes,
    generate_panel,
    hilbert_spectrum,
    instantaneous_energy,
    network_metrics,
    partial_correlation,
    pearson,
    percentile_threshold,
    run_pipeline,
    threshold_network,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "NumericError",
    "__version__",
    "analytic_signal",
    "daily_returns",
    "decompose",
    "detect_crashes",
    "generate_panel",
    "hilbert_spectrum",
    "instantaneous_energy",
    "network_metrics",
    "partial_correlation",
    "pearson",
    "percentile_threshold",
    "run_pipeline",
    "threshold_network",
]
