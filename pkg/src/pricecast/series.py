"""Loading, validation, scaling, splitting, and windowing of hourly series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled values, optionally anchored to a start instant."""

    values: np.ndarray
    start_timestamp: datetime | None = None
    step: timedelta = timedelta(hours=1)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DataError(f"series values must be 1-D, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("series contains NaN or infinite values")
        if self.step <= timedelta(0):
            raise DataError("step must be a positive duration")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def timestamp_at(self, index: int) -> datetime | None:
        if self.start_timestamp is None:
            return None
        return self.start_timestamp + index * self.step

    def replace_values(self, values: np.ndarray) -> "TimeSeries":
        """Same time axis, new values."""
        return TimeSeries(values, self.start_timestamp, self.step)


@dataclass(frozen=True)
class Scaler:
    """Linear map sending [minimum, maximum] to [0, 1]."""

    minimum: float
    maximum: float

    def __post_init__(self):
        if not self.maximum > self.minimum:
            raise DataError("constant series: cannot fit a scaler (max == min)")

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.minimum) / (
            self.maximum - self.minimum
        )

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * (
            self.maximum - self.minimum
        ) + self.minimum


@dataclass(frozen=True)
class WindowedDataset:
    """Sliding input windows paired with the value ``horizon`` steps past
    each window's end: ``targets[i] == source[i + length + horizon - 1]``."""

    inputs: np.ndarray
    targets: np.ndarray
    length: int
    horizon: int

    def __len__(self) -> int:
        return self.inputs.shape[0]


def _parse_price(field: str, line_no: int) -> float:
    try:
        price = float(field)
    except ValueError:
        raise DataError(f"unparseable price {field!r} at line {line_no}") from None
    if not math.isfinite(price):
        raise DataError(f"missing or non-finite price at line {line_no}")
    return price


def _parse_timestamp(field: str, line_no: int) -> datetime:
    try:
        return datetime.fromisoformat(field)
    except ValueError:
        raise DataError(f"unparseable timestamp {field!r} at line {line_no}") from None


def _looks_like_header(row: list[str]) -> bool:
    # A header has no numeric price column and no leading ISO timestamp.
    try:
        float(row[-1])
        return False
    except ValueError:
        pass
    try:
        datetime.fromisoformat(row[0])
        return False
    except ValueError:
        return True


def load_series(path) -> TimeSeries:
    """Read a CSV of ``timestamp,price`` or bare ``price`` rows.

    The header row is optional.  When timestamps are present they must
    advance by a constant step (inferred from the first two rows); gaps and
    non-finite prices are errors, reported with their line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")

    prices: list[float] = []
    timestamps: list[datetime] = []
    n_columns = None
    with path.open(newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            row = [field.strip() for field in row]
            if not row or not any(row):
                continue
            if line_no == 1 and _looks_like_header(row):
                continue
            if n_columns is None:
                n_columns = len(row)
                if n_columns not in (1, 2):
                    raise DataError(
                        f"expected 1 or 2 columns, got {n_columns} at line {line_no}"
                    )
            elif len(row) != n_columns:
                raise DataError(
                    f"inconsistent column count at line {line_no}: "
                    f"expected {n_columns}, got {len(row)}"
                )
            if n_columns == 2:
                timestamps.append(_parse_timestamp(row[0], line_no))
            prices.append(_parse_price(row[-1], line_no))

    if not prices:
        raise DataError(f"empty series: {path}")

    start = None
    step = timedelta(hours=1)
    if timestamps:
        start = timestamps[0]
        if len(timestamps) >= 2:
            step = timestamps[1] - timestamps[0]
            if step <= timedelta(0):
                raise DataError("timestamps must be strictly increasing")
            for i in range(2, len(timestamps)):
                if timestamps[i] - timestamps[i - 1] != step:
                    raise DataError(
                        f"gap or irregular timestamp at data row {i + 1} "
                        f"({timestamps[i].isoformat()})"
                    )
    return TimeSeries(np.array(prices), start, step)


def split(series: TimeSeries, n_train: int, n_test: int) -> tuple[TimeSeries, TimeSeries]:
    """Chronological prefix/suffix split; errors when counts exceed length."""
    if n_train < 1 or n_test < 0:
        raise DataError("split counts must be positive (train) and non-negative (test)")
    if n_train + n_test > len(series):
        raise DataError(
            f"split needs {n_train} + {n_test} samples but series has {len(series)}"
        )
    train = TimeSeries(series.values[:n_train], series.start_timestamp, series.step)
    test = TimeSeries(
        series.values[n_train : n_train + n_test], series.timestamp_at(n_train), series.step
    )
    return train, test


def fit_scale(series: TimeSeries) -> tuple[TimeSeries, Scaler]:
    """Fit a [0, 1] scaler on ``series`` and return the scaled copy with it.

    Fit on the training split only and reuse the scaler on test data.
    """
    if len(series) < 2:
        raise DataError("need at least 2 samples to fit a scaler")
    scaler = Scaler(float(series.values.min()), float(series.values.max()))
    return series.replace_values(scaler.transform(series.values)), scaler


def make_windows(series: TimeSeries, length: int, horizon: int) -> WindowedDataset:
    """All ``N - length - horizon + 1`` sliding windows with their targets."""
    if length < 1 or horizon < 1:
        raise DataError("window length and horizon must be >= 1")
    n = len(series)
    count = n - length - horizon + 1
    if count < 1:
        raise DataError(
            f"series too short: {n} samples cannot fit window {length} + horizon {horizon}"
        )
    inputs = np.lib.stride_tricks.sliding_window_view(series.values, length)[:count]
    targets = series.values[length + horizon - 1 :]
    return WindowedDataset(
        inputs=np.ascontiguousarray(inputs),
        targets=targets.copy(),
        length=length,
        horizon=horizon,
    )


def attach_exogenous(dataset: WindowedDataset, exogenous: TimeSeries) -> WindowedDataset:
    """Widen each input window with the matching window of a second series
    (e.g. load consumption), keeping the price targets.

    Experimental: the forecasting protocol is validated on price history
    alone.  Downstream encoder dims must account for the doubled width.
    """
    exo = make_windows(exogenous, dataset.length, dataset.horizon)
    if len(exo) != len(dataset):
        raise DataError(
            f"exogenous series yields {len(exo)} windows but the dataset has "
            f"{len(dataset)}; lengths must match"
        )
    return WindowedDataset(
        inputs=np.hstack([dataset.inputs, exo.inputs]),
        targets=dataset.targets,
        length=dataset.length,
        horizon=dataset.horizon,
    )
