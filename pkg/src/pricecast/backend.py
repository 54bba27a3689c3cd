"""Envelope kernel selection: compiled extension when available, numpy otherwise.

Set PRICECAST_BACKEND=numpy (or =cython) before import to force a choice;
forcing the extension when it was never built raises ImportError rather than
silently falling back.
"""

import os

_forced = os.environ.get("PRICECAST_BACKEND")

if _forced == "numpy":
    from . import _envelope_np as _impl
elif _forced == "cython":
    from . import _envelope_cy as _impl  # type: ignore[no-redef]
elif _forced:
    raise ImportError(f"unknown PRICECAST_BACKEND {_forced!r}; use 'numpy' or 'cython'")
else:
    try:
        from . import _envelope_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        from . import _envelope_np as _impl  # type: ignore[no-redef]

BACKEND_NAME: str = _impl.BACKEND_NAME
envelope_mean = _impl.envelope_mean
count_zero_crossings = _impl.count_zero_crossings
local_extrema = _impl.local_extrema
