"""Score-driven fitness models for weighted temporal networks."""

from ._sdnet import (
    DataError,
    NumericalError,
    __version__,
    auc,
    bic,
    diebold_mariano,
    fit_constant,
    fit_nofitness,
    fit_sd,
    fit_snapshot_sequence,
    forecast_auc,
    identify,
    ks_two_sample,
    mad_log,
    mse_log,
    rolling_forecast,
    run_experiment,
    simulate,
    spearman,
)

GROUPS = ("bin_in", "bin_out", "w_in", "w_out")

__all__ = [
    "DataError",
    "GROUPS",
    "NumericalError",
    "__version__",
    "auc",
    "bic",
    "diebold_mariano",
    "fit_constant",
    "fit_nofitness",
    "fit_sd",
    "fit_snapshot_sequence",
    "forecast_auc",
    "identify",
    "ks_two_sample",
    "mad_log",
    "mse_log",
    "rolling_forecast",
    "run_experiment",
    "simulate",
    "spearman",
]
