"""Pure-numpy reference implementations of the hot kernels.

Same signatures and semantics as the numba versions; used when numba is
unavailable or disabled via HALFSECT_NO_NUMBA=1.
"""

import numpy as np

BACKEND = "numpy"


def legendre_table(x, lmax):
    """Normalized associated Legendre values B_lm(x) for all 0 <= m <= l <= lmax.

    B_lm is scaled so that the real harmonics B_lm(cos(colat)) * {1, cos(m*az),
    sin(m*az)} are orthonormal in L2 of the unit 2-sphere (the sqrt(2) azimuth
    factor for m > 0 is folded into B). Column index is l*(l+1)//2 + m.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    sx = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    nidx = (lmax + 1) * (lmax + 2) // 2
    # build transposed so each recurrence writes a contiguous row; the
    # returned view then has contiguous columns, which downstream slices
    out = np.zeros((nidx, n))
    out[0] = np.sqrt(1.0 / (4.0 * np.pi))
    for m in range(1, lmax + 1):
        f = np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        if m == 1:
            f *= np.sqrt(2.0)
        out[m * (m + 1) // 2 + m] = f * sx * out[(m - 1) * m // 2 + m - 1]
    for m in range(0, lmax):
        out[(m + 1) * (m + 2) // 2 + m] = np.sqrt(2.0 * m + 3.0) * x * out[m * (m + 1) // 2 + m]
    for m in range(0, lmax + 1):
        for l in range(m + 2, lmax + 1):
            a = np.sqrt((2.0 * l - 1.0) * (2.0 * l + 1.0) / ((l - m) * (l + m)))
            b = np.sqrt(
                (2.0 * l + 1.0) * (l + m - 1.0) * (l - m - 1.0)
                / ((2.0 * l - 3.0) * (l - m) * (l + m))
            )
            out[l * (l + 1) // 2 + m] = (
                a * x * out[(l - 1) * l // 2 + m] - b * out[(l - 2) * (l - 1) // 2 + m]
            )
    return out.T


def _bracket(coords, q):
    """Left bracket index and fractional offset, clamped to the grid range."""
    i = np.searchsorted(coords, q, side="right") - 1
    i = np.clip(i, 0, coords.shape[0] - 2)
    h = coords[i + 1] - coords[i]
    t = np.clip((q - coords[i]) / h, 0.0, 1.0)
    return i, t


def bilinear(values, c0, c1, q0, q1):
    """Bilinear interpolation on a rectilinear grid.

    values has shape (len(c0), len(c1)); coordinate arrays are strictly
    increasing and must cover the query range (wraparound / pole handling
    is the caller's job via augmentation).
    """
    i, s = _bracket(c0, np.asarray(q0, dtype=np.float64))
    j, t = _bracket(c1, np.asarray(q1, dtype=np.float64))
    v00 = values[i, j]
    v01 = values[i, j + 1]
    v10 = values[i + 1, j]
    v11 = values[i + 1, j + 1]
    return (1 - s) * ((1 - t) * v00 + t * v01) + s * ((1 - t) * v10 + t * v11)


def trilinear(values, c0, c1, c2, q0, q1, q2):
    """Trilinear interpolation on a rectilinear grid, same contract as bilinear."""
    i, s = _bracket(c0, np.asarray(q0, dtype=np.float64))
    j, t = _bracket(c1, np.asarray(q1, dtype=np.float64))
    k, u = _bracket(c2, np.asarray(q2, dtype=np.float64))
    out = np.zeros_like(s)
    for di, ws in ((0, 1 - s), (1, s)):
        for dj, wt in ((0, 1 - t), (1, t)):
            for dk, wu in ((0, 1 - u), (1, u)):
                out += ws * wt * wu * values[i + di, j + dj, k + dk]
    return out
