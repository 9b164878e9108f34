"""Spherical geometry substrate: unit directions, quadrature grids on S^d,
and the block rotations that align a coordinate axis with a given direction.

All objects are immutable after construction and all functions are pure, so
everything here is safe to share across threads.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import InputError

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9

#: Surface areas |S^d| for the supported sphere dimensions.
SPHERE_AREA = {1: 2.0 * np.pi, 2: 4.0 * np.pi, 3: 2.0 * np.pi**2}


def unit_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate and return a unit direction as a float64 array.

    Inputs within 1e-9 of unit length are renormalized; anything further off
    is rejected. ``dim`` is the ambient dimension n (must be >= 2).
    """
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise InputError(f"direction must be a 1-d vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise InputError(f"direction has dimension {v.shape[0]}, expected {dim}")
    if v.shape[0] < 2:
        raise InputError("directions need at least 2 components")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > RENORM_TOL:
        raise InputError(f"direction norm {norm!r} is not within {RENORM_TOL} of 1")
    if abs(norm - 1.0) <= 1e-15:
        # already unit to rounding: keep the exact bits so that revalidating
        # a frame (e.g. flipping its sign) preserves its geometry key
        return v
    return v / norm


@dataclass(frozen=True)
class SphericalGrid:
    """Quadrature nodes and weights on S^dim, laid out as a product chart.

    ``axes`` holds the 1-d chart coordinate arrays (angles, ascending) and
    ``shape`` the node layout; ``nodes`` is the flattened C-order product.
    Weights are in surface-measure units and sum to |S^dim|.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    axes: tuple = field(default=())
    shape: tuple = field(default=())

    def __post_init__(self):
        if self.nodes.shape[0] != self.weights.shape[0]:
            raise InputError("node count must equal weight count")
        if np.any(self.weights <= 0):
            raise InputError("grid weights must be positive")
        area = SPHERE_AREA[self.dim]
        err = abs(float(self.weights.sum()) - area) / area
        if err > 1e-10:
            raise InputError(f"weight sum off surface area by rel {err:.2e}")

    def __len__(self) -> int:
        return self.nodes.shape[0]


def build_grid(d: int, resolution: int) -> SphericalGrid:
    """Deterministic quadrature grid on S^d for d in {1, 2, 3}.

    d=1: ``resolution`` uniform nodes on the circle, equal weights.
    d=2: ``resolution`` Gauss-Legendre nodes in the polar cosine times
         ``2*resolution`` uniform azimuths (pole-free, band-limit exact).
    d=3: ``2*resolution`` Gauss-Legendre nodes in the polar angle (sin^2
         Jacobian folded into the weights) times an S^2 grid of the same
         resolution; the polar axis is the last coordinate e_4.
    """
    if d not in (1, 2, 3):
        raise InputError(f"unsupported sphere dimension d={d}")
    if resolution < 4:
        raise InputError(f"resolution {resolution} below minimum 4")

    if d == 1:
        ang = 2.0 * np.pi * np.arange(resolution) / resolution
        nodes = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        weights = np.full(resolution, 2.0 * np.pi / resolution)
        return SphericalGrid(1, nodes, weights, "uniform_circle", (ang,), (resolution,))

    if d == 2:
        x, w = leggauss(resolution)
        colat = np.arccos(x)[::-1].copy()          # ascending colatitude
        wp = w[::-1].copy()
        naz = 2 * resolution
        az = 2.0 * np.pi * np.arange(naz) / naz
        waz = 2.0 * np.pi / naz
        cl = np.repeat(colat, naz)
        aa = np.tile(az, resolution)
        sin_cl = np.sin(cl)
        nodes = np.stack([sin_cl * np.cos(aa), sin_cl * np.sin(aa), np.cos(cl)], axis=-1)
        weights = np.repeat(wp * waz, naz)
        return SphericalGrid(2, nodes, weights, "gauss_lonlat", (colat, az), (resolution, naz))

    # d == 3: oversampled Gauss-Legendre in the polar angle keeps quadrature
    # of band-limited integrands at machine accuracy despite the sin^2 factor.
    nchi = 2 * resolution
    xc, wc = leggauss(nchi)
    chi = ((xc + 1.0) * (np.pi / 2.0))[::1]
    order = np.argsort(chi)
    chi = chi[order]
    wchi = (wc * (np.pi / 2.0))[order] * np.sin(chi) ** 2
    inner = build_grid(2, resolution)
    n2 = len(inner)
    sin_chi = np.repeat(np.sin(chi), n2)
    cos_chi = np.repeat(np.cos(chi), n2)
    sig = np.tile(inner.nodes, (nchi, 1))
    nodes = np.concatenate([sin_chi[:, None] * sig, cos_chi[:, None]], axis=1)
    weights = np.repeat(wchi, n2) * np.tile(inner.weights, nchi)
    axes = (chi,) + inner.axes
    shape = (nchi,) + inner.shape
    return SphericalGrid(3, nodes, weights, "gauss_s3", axes, shape)


@dataclass(frozen=True)
class Rotation:
    """A proper orthogonal matrix, validated at construction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        n = m.shape[0]
        if m.shape != (n, n):
            raise InputError("rotation matrix must be square")
        if np.max(np.abs(m.T @ m - np.eye(n))) > UNIT_TOL:
            raise InputError("matrix is not orthogonal within 1e-12")
        if abs(np.linalg.det(m) - 1.0) > 1e-10:
            raise InputError("matrix determinant is not +1")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def rotation_to(v, n: int, k: int) -> Rotation:
    """Block rotation of R^n fixing the last k coordinates and sending
    e_{n-k} to v.

    The upper-left (n-k) x (n-k) block is the minimal rotation in the plane
    spanned by e_{n-k} and v, acting as the identity on the orthocomplement;
    for the antipode v = -e_{n-k} it is the half-turn in the (e_1, e_{n-k})
    plane. The lower-right block is the k x k identity, so hemispheres with
    respect to the last coordinate are preserved.
    """
    if not (1 <= k <= n - 2):
        raise InputError(f"k={k} out of range for n={n} (need 1 <= k <= n-2)")
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] == n:
        if np.max(np.abs(v[n - k:])) > UNIT_TOL:
            raise InputError("v has nonzero components outside the first n-k coordinates")
        v = v[: n - k]
    v = unit_vector(v, n - k)
    nk = n - k
    e = np.zeros(nk)
    e[nk - 1] = 1.0
    c = float(v @ e)
    block = np.eye(nk)
    if c <= -1.0 + 1e-14:
        # antipodal: half-turn in the (e_1, e_{n-k}) plane
        block[0, 0] = -1.0
        block[nk - 1, nk - 1] = -1.0
    else:
        w = v - c * e
        sw = float(np.linalg.norm(w))
        if sw > 0.0:
            f = w / sw
            # R = I + (c-1)(ee^T + ff^T) + s(fe^T - ef^T), s = sin of the angle
            block += (c - 1.0) * (np.outer(e, e) + np.outer(f, f))
            block += sw * (np.outer(f, e) - np.outer(e, f))
    mat = np.eye(n)
    mat[:nk, :nk] = block
    return Rotation(mat)


def rotate_point(rot: Rotation, x) -> np.ndarray:
    """Apply the rotation to a unit direction; the result is again unit."""
    x = unit_vector(x)
    if x.shape[0] != rot.dim:
        raise InputError(f"dimension mismatch: point {x.shape[0]}, rotation {rot.dim}")
    return rot.matrix @ x
