"""Forecast error metrics, reported in original price units."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _paired(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1:
        raise ValueError(f"actual {a.shape} and predicted {p.shape} must be equal-length vectors")
    if a.shape[0] == 0:
        raise ValueError("cannot score zero samples")
    return a, p


def rmse(actual, predicted) -> float:
    """Root mean squared difference.

    The differences are scaled by their largest magnitude before squaring so
    subnormal errors do not underflow to zero.
    """
    a, p = _paired(actual, predicted)
    d = a - p
    peak = float(np.max(np.abs(d)))
    if peak == 0.0:
        return 0.0
    return peak * float(np.sqrt(np.mean((d / peak) ** 2)))


def mae(actual, predicted) -> float:
    """Mean absolute difference."""
    a, p = _paired(actual, predicted)
    return float(np.mean(np.abs(a - p)))


@dataclass(frozen=True)
class MetricReport:
    """One benchmark cell: a model scored at one horizon."""

    model: str
    horizon: int
    rmse: float
    mae: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        # power-mean inequality, with one-ulp-scale slack: when every error
        # is identical the two means agree only up to rounding
        if not (self.mae >= 0.0 and self.rmse >= self.mae * (1.0 - 1e-12)):
            raise ValueError(
                f"impossible metrics: rmse {self.rmse} < mae {self.mae} "
                f"for {self.model} at horizon {self.horizon}"
            )


def evaluate(model: str, horizon: int, actual, predicted) -> MetricReport:
    a, p = _paired(actual, predicted)
    return MetricReport(
        model=model,
        horizon=horizon,
        rmse=rmse(a, p),
        mae=mae(a, p),
        n_samples=a.shape[0],
    )
