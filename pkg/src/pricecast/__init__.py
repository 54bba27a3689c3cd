"""Electricity price forecasting via ensemble decomposition, entropy-guided
denoising, stacked-autoencoder features, and recurrent predictors."""

from .backend import BACKEND_NAME
from .benchmark import BenchmarkConfig, BenchmarkResult, run_benchmark
from .denoise import DenoiseReport, denoise_series
from .emd import CeemdanConfig, Decomposition, Imf, ceemdan_decompose, emd_decompose, sift_imf
from .entropy import PeConfig, permutation_entropy
from .forecast import ForecastModel, TrainConfig, build_sae, forecast, train_forecaster
from .metrics import MetricReport, mae, rmse
from .series import Scaler, TimeSeries, WindowedDataset, fit_scale, load_series, make_windows, split
from .synthetic import synthetic_prices

__all__ = [
    "BACKEND_NAME",
    "BenchmarkConfig",
    "BenchmarkResult",
    "CeemdanConfig",
    "Decomposition",
    "DenoiseReport",
    "ForecastModel",
    "Imf",
    "MetricReport",
    "PeConfig",
    "Scaler",
    "TimeSeries",
    "TrainConfig",
    "WindowedDataset",
    "build_sae",
    "ceemdan_decompose",
    "denoise_series",
    "emd_decompose",
    "fit_scale",
    "forecast",
    "load_series",
    "mae",
    "make_windows",
    "permutation_entropy",
    "rmse",
    "run_benchmark",
    "sift_imf",
    "split",
    "synthetic_prices",
    "train_forecaster",
]
__version__ = "0.1.0"
