"""Optional numba acceleration.

Set ``INCUSIM_DISABLE_NUMBA=1`` to force the pure numpy/python paths. When
numba is missing the fallback is selected automatically.
"""
import os

_disabled = os.environ.get("INCUSIM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("disabled by INCUSIM_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit and @njit(...) both return the function untouched
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend():
    return "numba" if HAS_NUMBA else "numpy"
