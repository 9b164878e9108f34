"""numba-compiled hot kernels. Semantics match _numpy_impl exactly."""

import numpy as np
from numba import njit, prange

BACKEND = "numba"


@njit(cache=True, parallel=True)
def _legendre_table_core(x, lmax):
    n = x.shape[0]
    nidx = (lmax + 1) * (lmax + 2) // 2
    out = np.zeros((n, nidx))
    c00 = np.sqrt(1.0 / (4.0 * np.pi))
    for p in prange(n):
        xp = x[p]
        sx = np.sqrt(max(0.0, 1.0 - xp * xp))
        out[p, 0] = c00
        for m in range(1, lmax + 1):
            f = np.sqrt((2.0 * m + 1.0) / (2.0 * m))
            if m == 1:
                f *= np.sqrt(2.0)
            out[p, m * (m + 1) // 2 + m] = f * sx * out[p, (m - 1) * m // 2 + m - 1]
        for m in range(0, lmax):
            out[p, (m + 1) * (m + 2) // 2 + m] = (
                np.sqrt(2.0 * m + 3.0) * xp * out[p, m * (m + 1) // 2 + m]
            )
        for m in range(0, lmax + 1):
            for l in range(m + 2, lmax + 1):
                a = np.sqrt((2.0 * l - 1.0) * (2.0 * l + 1.0) / ((l - m) * (l + m)))
                b = np.sqrt(
                    (2.0 * l + 1.0) * (l + m - 1.0) * (l - m - 1.0)
                    / ((2.0 * l - 3.0) * (l - m) * (l + m))
                )
                out[p, l * (l + 1) // 2 + m] = (
                    a * xp * out[p, (l - 1) * l // 2 + m]
                    - b * out[p, (l - 2) * (l - 1) // 2 + m]
                )
    return out


def legendre_table(x, lmax):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _legendre_table_core(x, lmax)


@njit(cache=True, inline="always")
def _bracket1(coords, q):
    lo, hi = 0, coords.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if coords[mid] <= q:
            lo = mid
        else:
            hi = mid
    h = coords[lo + 1] - coords[lo]
    t = (q - coords[lo]) / h
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return lo, t


@njit(cache=True)
def _bilinear_core(values, c0, c1, q0, q1):
    n = q0.shape[0]
    out = np.empty(n)
    for p in range(n):
        i, s = _bracket1(c0, q0[p])
        j, t = _bracket1(c1, q1[p])
        out[p] = (1 - s) * ((1 - t) * values[i, j] + t * values[i, j + 1]) + s * (
            (1 - t) * values[i + 1, j] + t * values[i + 1, j + 1]
        )
    return out


def bilinear(values, c0, c1, q0, q1):
    return _bilinear_core(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(c0, dtype=np.float64),
        np.ascontiguousarray(c1, dtype=np.float64),
        np.ascontiguousarray(q0, dtype=np.float64),
        np.ascontiguousarray(q1, dtype=np.float64),
    )


@njit(cache=True)
def _trilinear_core(values, c0, c1, c2, q0, q1, q2):
    n = q0.shape[0]
    out = np.empty(n)
    for p in range(n):
        i, s = _bracket1(c0, q0[p])
        j, t = _bracket1(c1, q1[p])
        k, u = _bracket1(c2, q2[p])
        acc = 0.0
        acc += (1 - s) * (1 - t) * (1 - u) * values[i, j, k]
        acc += (1 - s) * (1 - t) * u * values[i, j, k + 1]
        acc += (1 - s) * t * (1 - u) * values[i, j + 1, k]
        acc += (1 - s) * t * u * values[i, j + 1, k + 1]
        acc += s * (1 - t) * (1 - u) * values[i + 1, j, k]
        acc += s * (1 - t) * u * values[i + 1, j, k + 1]
        acc += s * t * (1 - u) * values[i + 1, j + 1, k]
        acc += s * t * u * values[i + 1, j + 1, k + 1]
        out[p] = acc
    return out


def trilinear(values, c0, c1, c2, q0, q1, q2):
    return _trilinear_core(
        np.ascontiguousarray(values, dtype=np.float64),
        np.ascontiguousarray(c0, dtype=np.float64),
        np.ascontiguousarray(c1, dtype=np.float64),
        np.ascontiguousarray(c2, dtype=np.float64),
        np.ascontiguousarray(q0, dtype=np.float64),
        np.ascontiguousarray(q1, dtype=np.float64),
        np.ascontiguousarray(q2, dtype=np.float64),
    )
