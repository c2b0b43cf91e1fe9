"""Frequency-domain forecasting loss, entropy diagnostics and linear forecasters."""

from .data import TimeSeriesFrame, load_csv, chronological_split, zscore_fit_apply, make_windows
from .loss import LossSpec, olma_total, olma_gradient
from .forecaster import init_model, train, evaluate, TrainConfig

__all__ = [
    "TimeSeriesFrame", "load_csv", "chronological_split", "zscore_fit_apply", "make_windows",
    "LossSpec", "olma_total", "olma_gradient", "init_model", "train", "evaluate", "TrainConfig",
]
__version__ = "0.1.0"
