"""JIT shim: numba-accelerated kernels with a pure-Python/numpy fallback.

Set ``AFFINESPHERES_DISABLE_NUMBA=1`` to force the fallback path (useful for
debugging and for benchmarking the interpreted kernels).  The fallback runs
the exact same code, just without compilation.
"""

from __future__ import annotations

import os


def _numba_requested() -> bool:
    flag = os.environ.get("AFFINESPHERES_DISABLE_NUMBA", "").strip().lower()
    return flag not in {"1", "true", "yes", "on"}


NUMBA_ENABLED = False

if _numba_requested():
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)

else:

    def njit(*args, **kwargs):
        # no-op decorator, keeps call sites identical
        if args and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap
