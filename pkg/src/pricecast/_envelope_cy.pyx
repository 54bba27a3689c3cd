# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled envelope kernel: the hot loop of sifting.

Same contract as ``_envelope_np`` (plateau-midpoint extrema, two mirrored
extrema per edge, natural cubic spline envelopes).  The tridiagonal spline
system is solved in place with the Thomas algorithm and evaluated by a
single forward walk over the integer grid.
"""

import numpy as np

BACKEND_NAME = "cython"


cdef Py_ssize_t _scan_extrema(const double[::1] x,
                              long long[::1] max_buf, long long[::1] min_buf,
                              Py_ssize_t* n_min_out) nogil:
    # Runs of equal values collapse to one extremum at the run midpoint.
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_max = 0, n_min = 0
    cdef Py_ssize_t i, run_start = 0
    cdef int prev_dir = 0, cur_dir
    cdef double prev_v
    if n < 3:
        n_min_out[0] = 0
        return 0
    prev_v = x[0]
    for i in range(1, n):
        if x[i] != prev_v:
            cur_dir = 1 if x[i] > prev_v else -1
            if prev_dir > 0 and cur_dir < 0:
                max_buf[n_max] = (run_start + i - 1) // 2
                n_max += 1
            elif prev_dir < 0 and cur_dir > 0:
                min_buf[n_min] = (run_start + i - 1) // 2
                n_min += 1
            prev_dir = cur_dir
            run_start = i
            prev_v = x[i]
    n_min_out[0] = n_min
    return n_max


cdef void _mirror_knots(const double[::1] x, long long[::1] idx, Py_ssize_t m,
                        Py_ssize_t n, double[::1] t, double[::1] y) nogil:
    # Reflect up to two extrema across each boundary sample; output has
    # m + 2*min(2, m) knots, strictly increasing because extrema are interior.
    cdef Py_ssize_t k = 2 if m >= 2 else m
    cdef Py_ssize_t j
    for j in range(k):
        t[j] = -<double> idx[k - 1 - j]
        y[j] = x[idx[k - 1 - j]]
    for j in range(m):
        t[k + j] = <double> idx[j]
        y[k + j] = x[idx[j]]
    for j in range(k):
        t[k + m + j] = <double> (2 * (n - 1) - idx[m - 1 - j])
        y[k + m + j] = x[idx[m - 1 - j]]


cdef void _natural_spline_grid(const double[::1] t, const double[::1] y, Py_ssize_t m,
                               double[::1] out, Py_ssize_t n,
                               double[::1] deriv2, double[::1] scratch) nogil:
    # Second derivatives by the Thomas algorithm (natural ends: M[0] = M[m-1] = 0),
    # then evaluation at the integer grid 0..n-1 walking segments left to right.
    cdef Py_ssize_t j, i
    cdef double h0, h1, w, q, a, b
    if m == 2:
        h0 = t[1] - t[0]
        for i in range(n):
            q = (<double> i - t[0]) / h0
            out[i] = y[0] * (1.0 - q) + y[1] * q
        return

    deriv2[0] = 0.0
    deriv2[m - 1] = 0.0
    # forward sweep: scratch holds the modified upper diagonal, deriv2 the rhs
    h0 = t[1] - t[0]
    h1 = t[2] - t[1]
    b = 2.0 * (h0 + h1)
    scratch[1] = h1 / b
    deriv2[1] = (6.0 * ((y[2] - y[1]) / h1 - (y[1] - y[0]) / h0)) / b
    for j in range(2, m - 1):
        h0 = t[j] - t[j - 1]
        h1 = t[j + 1] - t[j]
        b = 2.0 * (h0 + h1) - h0 * scratch[j - 1]
        scratch[j] = h1 / b
        deriv2[j] = (6.0 * ((y[j + 1] - y[j]) / h1 - (y[j] - y[j - 1]) / h0)
                     - h0 * deriv2[j - 1]) / b
    for j in range(m - 3, 0, -1):
        deriv2[j] = deriv2[j] - scratch[j] * deriv2[j + 1]

    j = 0
    for i in range(n):
        q = <double> i
        while j < m - 2 and q > t[j + 1]:
            j += 1
        h0 = t[j + 1] - t[j]
        a = (t[j + 1] - q) / h0
        b = (q - t[j]) / h0
        out[i] = (a * y[j] + b * y[j + 1]
                  + ((a * a * a - a) * deriv2[j] + (b * b * b - b) * deriv2[j + 1])
                  * (h0 * h0) / 6.0)


def local_extrema(const double[::1] x):
    """Indices of local maxima and minima (plateau midpoints, interior only)."""
    cdef Py_ssize_t n = x.shape[0]
    max_buf = np.empty(n, dtype=np.int64)
    min_buf = np.empty(n, dtype=np.int64)
    cdef long long[::1] max_mv = max_buf
    cdef long long[::1] min_mv = min_buf
    cdef Py_ssize_t n_min = 0
    cdef Py_ssize_t n_max = _scan_extrema(x, max_mv, min_mv, &n_min)
    return max_buf[:n_max].copy(), min_buf[:n_min].copy()


def count_zero_crossings(const double[::1] x):
    """Sign changes in ``x``, with exact zeros transparent to the count."""
    cdef Py_ssize_t i, c = 0
    cdef int last = 0, s
    for i in range(x.shape[0]):
        s = 1 if x[i] > 0.0 else (-1 if x[i] < 0.0 else 0)
        if s != 0:
            if last != 0 and s != last:
                c += 1
            last = s
    return c


def envelope_mean(const double[::1] x):
    """Mean of upper/lower natural-spline envelopes, or None if too few extrema.

    Returns ``(envelope | None, n_maxima, n_minima)``.
    """
    cdef Py_ssize_t n = x.shape[0]
    max_buf = np.empty(n, dtype=np.int64)
    min_buf = np.empty(n, dtype=np.int64)
    cdef long long[::1] max_mv = max_buf
    cdef long long[::1] min_mv = min_buf
    cdef Py_ssize_t n_min = 0
    cdef Py_ssize_t n_max = _scan_extrema(x, max_mv, min_mv, &n_min)
    if n_max < 2 or n_min < 2:
        return None, n_max, n_min

    cdef Py_ssize_t m_up = n_max + 4
    cdef Py_ssize_t m_lo = n_min + 4
    t = np.empty(m_up, dtype=np.float64)
    yk = np.empty(m_up, dtype=np.float64)
    t2 = np.empty(m_lo, dtype=np.float64)
    yk2 = np.empty(m_lo, dtype=np.float64)
    env = np.empty(n, dtype=np.float64)
    lower = np.empty(n, dtype=np.float64)
    deriv2 = np.empty(max(m_up, m_lo), dtype=np.float64)
    scratch = np.empty(max(m_up, m_lo), dtype=np.float64)

    cdef double[::1] t_mv = t, y_mv = yk, t2_mv = t2, y2_mv = yk2
    cdef double[::1] env_mv = env, low_mv = lower
    cdef double[::1] d2_mv = deriv2, sc_mv = scratch
    cdef Py_ssize_t i

    with nogil:
        _mirror_knots(x, max_mv, n_max, n, t_mv, y_mv)
        _natural_spline_grid(t_mv, y_mv, m_up, env_mv, n, d2_mv, sc_mv)
        _mirror_knots(x, min_mv, n_min, n, t2_mv, y2_mv)
        _natural_spline_grid(t2_mv, y2_mv, m_lo, low_mv, n, d2_mv, sc_mv)
        for i in range(n):
            env_mv[i] = 0.5 * (env_mv[i] + low_mv[i])
    return env, n_max, n_min
