"""Backend selection for the hot kernels.

The accelerated path compiles the loop kernels with numba's ``@njit``; the
fallback path runs vectorized numpy (or plain loops where a recurrence cannot
be vectorized).  Set ``BINSIG_NO_NUMBA=1`` in the environment before import to
force the fallback.  Within either backend every kernel is deterministic and
independent of thread count.
"""

from __future__ import annotations

import os

_flag = os.environ.get("BINSIG_NO_NUMBA", "").strip().lower()
_disabled = _flag in ("1", "true", "yes", "on")

NUMBA_ENABLED = False
if not _disabled:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


def maybe_jit(func):
    """Compile ``func`` with njit when the numba backend is active."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True, nogil=True)(func)
    return func


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
