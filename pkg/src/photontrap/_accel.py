"""Backend selection for the Monte Carlo kernels.

Set ``PHOTONTRAP_DISABLE_NUMBA=1`` to force the pure-numpy path even when
numba is importable.
"""

import os

_FLAG = os.environ.get("PHOTONTRAP_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in ("1", "true", "yes", "on")

try:
    if DISABLED:
        raise ImportError
    import numba  # noqa: F401
    from numba import config as _config
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        try:
            import numba.np.ufunc.omppool  # noqa: F401

            _config.THREADING_LAYER = "omp"
        except ImportError:
            pass
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def default_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
