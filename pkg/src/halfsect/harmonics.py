"""Real orthonormal spherical harmonics.

S^2 carries the full analysis/synthesis machinery (separable over the
product grid, so memory stays small even at high degree). S^3 gets an
orthonormal basis built from Gegenbauer polynomials times S^2 harmonics,
used for band-limited test bodies. Condon-Shortley phase is omitted; all
bases are L2-orthonormal over the full sphere.

Basis index conventions:
  S^2: flat column j = l*l + l + m with m in [-l, l]; m > 0 are cosine
       terms, m < 0 sine terms.
  S^3: a degree l holds (l+1)^2 members indexed by m_index in
       [0, (l+1)^2), decoded as L = isqrt(m_index), m = m_index - L*L - L,
       meaning the S^2 harmonic Y_{L,m} times the degree-(l-L) Gegenbauer
       factor in the polar angle.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_gegenbauer

from . import kernels
from .errors import InputError
from .sphere import SphericalGrid


def num_coeffs(lmax: int) -> int:
    return (lmax + 1) ** 2


def flat_index(l: int, m: int) -> int:
    if abs(m) > l:
        raise InputError(f"order m={m} out of range for degree l={l}")
    return l * l + l + m


def degrees(lmax: int) -> np.ndarray:
    """Degree l of each flat coefficient index."""
    out = np.empty(num_coeffs(lmax), dtype=np.int64)
    for l in range(lmax + 1):
        out[l * l : (l + 1) ** 2] = l
    return out


def sh_matrix(points: np.ndarray, lmax: int) -> np.ndarray:
    """Dense (N, (lmax+1)^2) matrix of real orthonormal Y_lm at unit points."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    x = np.clip(points[:, 2], -1.0, 1.0)
    az = np.arctan2(points[:, 1], points[:, 0])
    btab = kernels.legendre_table(x, lmax)
    out = np.zeros((points.shape[0], num_coeffs(lmax)))
    marr = np.arange(1, lmax + 1)
    cos_t = np.cos(az[:, None] * marr[None, :])
    sin_t = np.sin(az[:, None] * marr[None, :])
    for l in range(lmax + 1):
        base = l * (l + 1) // 2
        out[:, l * l + l] = btab[:, base]
        for m in range(1, l + 1):
            out[:, l * l + l + m] = btab[:, base + m] * cos_t[:, m - 1]
            out[:, l * l + l - m] = btab[:, base + m] * sin_t[:, m - 1]
    return out


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Coefficient table of a function on S^dim up to degree lmax."""

    dim: int
    lmax: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim != 2:
            raise InputError("spectra are supported on S^2 only")
        if self.coeffs.shape != (num_coeffs(self.lmax),):
            raise InputError("coefficient table has the wrong length")

    def coefficient(self, l: int, m: int) -> float:
        if l > self.lmax:
            return 0.0
        return float(self.coeffs[flat_index(l, m)])

    def degree_energy(self) -> np.ndarray:
        """Sum of squared coefficients per degree."""
        e = np.zeros(self.lmax + 1)
        for l in range(self.lmax + 1):
            e[l] = float(np.sum(self.coeffs[l * l : (l + 1) ** 2] ** 2))
        return e


def _require_s2_grid(grid: SphericalGrid, lmax: int) -> None:
    if grid.dim != 2 or grid.kind != "gauss_lonlat":
        raise InputError("analysis needs a Gauss lat-lon grid on S^2")
    if grid.shape[0] < 2 * lmax:
        raise InputError(
            f"grid resolution {grid.shape[0]} too low for L_max={lmax} (need >= {2 * lmax})"
        )


def analyze_values(values: np.ndarray, grid: SphericalGrid, lmax: int) -> HarmonicSpectrum:
    """Project node values on a Gauss lat-lon grid onto the harmonic basis.

    Separable: an FFT over the azimuth rings followed by weighted Legendre
    dot products in the polar direction. Exact for band-limited inputs.
    """
    _require_s2_grid(grid, lmax)
    npol, naz = grid.shape
    vals = np.asarray(values, dtype=np.float64).reshape(npol, naz)
    colat, _ = grid.axes
    x = np.cos(colat)
    wpol = grid.weights.reshape(npol, naz)[:, 0]   # polar weight incl. azimuth step
    fhat = np.fft.rfft(vals, axis=1)
    btab = kernels.legendre_table(x, lmax)
    coeffs = np.zeros(num_coeffs(lmax))
    for l in range(lmax + 1):
        base = l * (l + 1) // 2
        coeffs[l * l + l] = np.sum(wpol * btab[:, base] * fhat[:, 0].real)
        for m in range(1, l + 1):
            col = wpol * btab[:, base + m]
            coeffs[l * l + l + m] = np.sum(col * fhat[:, m].real)
            coeffs[l * l + l - m] = -np.sum(col * fhat[:, m].imag)
    return HarmonicSpectrum(2, lmax, coeffs)


def synthesize_on_grid(spec: HarmonicSpectrum, grid: SphericalGrid) -> np.ndarray:
    """Evaluate a spectrum on every node of a Gauss lat-lon grid (separable)."""
    if grid.dim != 2 or grid.kind != "gauss_lonlat":
        raise InputError("grid synthesis needs a Gauss lat-lon grid on S^2")
    npol, naz = grid.shape
    colat, az = grid.axes
    btab = kernels.legendre_table(np.cos(colat), spec.lmax)
    lmax = spec.lmax
    # per-azimuth-order polar profiles
    prof_c = np.zeros((npol, lmax + 1))
    prof_s = np.zeros((npol, lmax + 1))
    for l in range(lmax + 1):
        base = l * (l + 1) // 2
        prof_c[:, 0] += spec.coeffs[l * l + l] * btab[:, base]
        for m in range(1, l + 1):
            prof_c[:, m] += spec.coeffs[l * l + l + m] * btab[:, base + m]
            prof_s[:, m] += spec.coeffs[l * l + l - m] * btab[:, base + m]
    marr = np.arange(lmax + 1)
    cos_t = np.cos(az[:, None] * marr[None, :])
    sin_t = np.sin(az[:, None] * marr[None, :])
    vals = prof_c @ cos_t.T + prof_s @ sin_t.T
    return vals.reshape(-1)


def synthesize_at(spec: HarmonicSpectrum, points: np.ndarray) -> np.ndarray:
    """Evaluate a spectrum at arbitrary unit points."""
    return sh_matrix(points, spec.lmax) @ spec.coeffs


def sph_harm_s2(l: int, m: int, points: np.ndarray) -> np.ndarray:
    """Single real orthonormal harmonic Y_{l,m} on S^2."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    btab = kernels.legendre_table(np.clip(points[:, 2], -1.0, 1.0), l)
    col = btab[:, l * (l + 1) // 2 + abs(m)]
    if m == 0:
        return col
    az = np.arctan2(points[:, 1], points[:, 0])
    return col * (np.cos(m * az) if m > 0 else np.sin(-m * az))


def decode_s3_index(l: int, m_index: int) -> tuple[int, int]:
    if not (0 <= m_index < (l + 1) ** 2):
        raise InputError(f"m_index {m_index} out of range for degree {l} on S^3")
    big_l = math.isqrt(m_index)
    return big_l, m_index - big_l * big_l - big_l


def sph_harm_s3(l: int, m_index: int, points: np.ndarray) -> np.ndarray:
    """Single real orthonormal harmonic on S^3 (polar axis = last coordinate).

    The normalization constant 2^L L! sqrt(2(l+1)(l-L)! / (pi (l+L+1)!))
    makes the basis L2-orthonormal over S^3; verified by quadrature in the
    test suite.
    """
    big_l, m = decode_s3_index(l, m_index)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    cos_chi = np.clip(points[:, 3], -1.0, 1.0)
    sin_chi = np.sqrt(np.maximum(0.0, 1.0 - cos_chi**2))
    safe = np.maximum(sin_chi, 1e-300)
    sigma = points[:, :3] / safe[:, None]
    # at the poles sin_chi^L kills the S^2 factor for L > 0; for L = 0 the
    # factor is the constant Y_00, so the placeholder direction is harmless
    sigma[sin_chi < 1e-15] = (0.0, 0.0, 1.0)
    norm = (
        2.0**big_l
        * math.factorial(big_l)
        * math.sqrt(2.0 * (l + 1) * math.factorial(l - big_l) / (np.pi * math.factorial(l + big_l + 1)))
    )
    geg = eval_gegenbauer(l - big_l, big_l + 1.0, cos_chi)
    return norm * sin_chi**big_l * geg * sph_harm_s2(big_l, m, sigma)


def sph_harm_s1(l: int, m_index: int, points: np.ndarray) -> np.ndarray:
    """Real orthonormal circular harmonics: m_index 0 = cosine, 1 = sine."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ang = np.arctan2(points[:, 1], points[:, 0])
    if l == 0:
        return np.full(points.shape[0], 1.0 / np.sqrt(2.0 * np.pi))
    if m_index == 0:
        return np.cos(l * ang) / np.sqrt(np.pi)
    if m_index == 1:
        return np.sin(l * ang) / np.sqrt(np.pi)
    raise InputError("m_index on S^1 must be 0 (cos) or 1 (sin)")


def sph_harm(dim: int, l: int, m_index: int, points: np.ndarray) -> np.ndarray:
    """Dispatch a single real orthonormal harmonic on S^dim."""
    if dim == 1:
        return sph_harm_s1(l, m_index, points)
    if dim == 2:
        return sph_harm_s2(l, m_index, points)
    if dim == 3:
        return sph_harm_s3(l, m_index, points)
    raise InputError(f"no harmonic basis for sphere dimension {dim}")
