"""Python bindings for the tripcast trip-forecasting library."""

from ._core import (
    ConfigError,
    DataError,
    MissingArtifactError,
    calibrate_beta,
    detect_stay_points,
    distribution_mse,
    fit_ols,
    gravity_distribute,
    haversine_m,
    mean_shift,
    run_stage,
    stage_names,
)

__all__ = [
    "ConfigError",
    "DataError",
    "MissingArtifactError",
    "calibrate_beta",
    "detect_stay_points",
    "distribution_mse",
    "fit_ols",
    "gravity_distribute",
    "haversine_m",
    "mean_shift",
    "run_stage",
    "stage_names",
]
