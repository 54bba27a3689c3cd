"""Bundled synthetic price generator so the benchmark runs without real data.

The mix mirrors what hourly prices look like: a mild trend, daily and weekly
cycles, a slow persistent component (which makes longer horizons genuinely
harder), and observation noise.  Fully determined by the seed.
"""

from __future__ import annotations

from datetime import datetime, timedelta

import numpy as np
from scipy.signal import lfilter

from .series import TimeSeries

DEFAULT_SYNTHETIC_LENGTH = 2048


def synthetic_prices(
    n_samples: int = DEFAULT_SYNTHETIC_LENGTH,
    seed: int = 0,
    start: datetime | None = None,
) -> TimeSeries:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    t = np.arange(n_samples, dtype=np.float64)

    base = 45.0 + 0.001 * t
    daily = 10.0 * np.sin(2 * np.pi * t / 24.0) + 3.5 * np.sin(2 * np.pi * t / 12.0 + 1.0)
    weekly = 5.0 * np.sin(2 * np.pi * t / 168.0 + 0.5)
    # AR(1) with phi 0.98: marginal std ~ 10, so multi-hour drift dominates noise
    persistent = lfilter([1.0], [1.0, -0.98], 2.0 * rng.standard_normal(n_samples))
    noise = 1.5 * rng.standard_normal(n_samples)

    values = base + daily + weekly + persistent + noise
    if start is None:
        start = datetime(2019, 1, 1)
    return TimeSeries(values, start_timestamp=start, step=timedelta(hours=1))
