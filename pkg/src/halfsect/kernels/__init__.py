"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The numba path is the default. Set HALFSECT_NO_NUMBA=1 to force the numpy
implementations (useful for debugging and for the backend benchmark); the
fallback also engages automatically if numba cannot be imported.
"""

import os

_DISABLE = os.environ.get("HALFSECT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from ._numba_impl import BACKEND, bilinear, legendre_table, trilinear
    except ImportError:
        _DISABLE = True

if _DISABLE:
    from ._numpy_impl import BACKEND, bilinear, legendre_table, trilinear  # noqa: F811


def backend_name() -> str:
    """Which kernel implementation is active: 'numba' or 'numpy'."""
    return BACKEND


def warm_up() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    import numpy as np

    legendre_table(np.array([0.25]), 2)
    c = np.array([0.0, 1.0, 2.0])
    bilinear(np.zeros((3, 3)), c, c, np.array([0.5]), np.array([0.5]))
    trilinear(np.zeros((3, 3, 3)), c, c, c, np.array([0.5]), np.array([0.5]), np.array([0.5]))


__all__ = ["BACKEND", "backend_name", "bilinear", "legendre_table", "trilinear", "warm_up"]
