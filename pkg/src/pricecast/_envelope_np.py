"""Pure numpy envelope kernel: the fallback backend for the sifting hot loop.

Mirrors the interface of the compiled extension ``_envelope_cy``:

  envelope_mean(x)        -> (mean envelope | None, n_maxima, n_minima)
  count_zero_crossings(x) -> int
  local_extrema(x)        -> (maxima indices, minima indices)

Both backends implement identical semantics (plateau-midpoint extrema,
two mirrored extrema per edge, natural cubic spline envelopes); they may
differ in the last few ulps because the linear algebra paths differ.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline

BACKEND_NAME = "numpy"


def local_extrema(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of local maxima and minima of ``x``.

    Plateaus (runs of equal values) count once, at the run's midpoint
    (integer division).  Endpoints are never extrema.
    """
    n = x.shape[0]
    empty = np.empty(0, dtype=np.int64)
    if n < 3:
        return empty, empty
    d = np.diff(x)
    changes = np.nonzero(d != 0)[0]
    if changes.size < 2:
        return empty, empty
    starts = np.concatenate(([0], changes + 1))
    ends = np.concatenate((changes, [n - 1]))
    v = x[starts]
    dv = np.diff(v)
    is_max = (dv[:-1] > 0) & (dv[1:] < 0)
    is_min = (dv[:-1] < 0) & (dv[1:] > 0)
    j_max = np.nonzero(is_max)[0] + 1
    j_min = np.nonzero(is_min)[0] + 1
    max_idx = (starts[j_max] + ends[j_max]) // 2
    min_idx = (starts[j_min] + ends[j_min]) // 2
    return max_idx.astype(np.int64), min_idx.astype(np.int64)


def count_zero_crossings(x: np.ndarray) -> int:
    """Sign changes in ``x``, with exact zeros transparent to the count."""
    s = np.sign(x)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _mirrored_knots(idx: np.ndarray, val: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Reflect up to two extrema across each boundary sample so the spline
    # spans [0, n-1] without extrapolating.
    k = min(2, idx.shape[0])
    left_t = (-idx[:k])[::-1]
    left_y = val[:k][::-1]
    right_t = 2 * (n - 1) - idx[-k:][::-1]
    right_y = val[-k:][::-1]
    t = np.concatenate((left_t, idx, right_t)).astype(np.float64)
    y = np.concatenate((left_y, val, right_y))
    keep = np.concatenate(([True], np.diff(t) > 0))
    return t[keep], y[keep]


def _spline_envelope(idx: np.ndarray, val: np.ndarray, n: int) -> np.ndarray:
    t, y = _mirrored_knots(idx, val, n)
    grid = np.arange(n, dtype=np.float64)
    if t.shape[0] < 3:
        return np.interp(grid, t, y)
    spline = CubicSpline(t, y, bc_type="natural")
    return spline(grid)


def envelope_mean(x: np.ndarray) -> tuple[np.ndarray | None, int, int]:
    """Mean of the upper and lower spline envelopes of ``x``.

    Returns ``(None, n_max, n_min)`` when there are fewer than two maxima
    or two minima, in which case no envelope pair exists.
    """
    max_idx, min_idx = local_extrema(x)
    n_max, n_min = max_idx.shape[0], min_idx.shape[0]
    if n_max < 2 or n_min < 2:
        return None, n_max, n_min
    n = x.shape[0]
    upper = _spline_envelope(max_idx, x[max_idx], n)
    lower = _spline_envelope(min_idx, x[min_idx], n)
    return 0.5 * (upper + lower), n_max, n_min
