"""Star-body models and tabulated spherical functions.

A star body is described by its radial function: the distance from the
origin to the boundary along each unit direction. Analytic families (balls,
off-center balls, ellipsoids, harmonically perturbed balls) evaluate in
closed form; tabulated bodies interpolate grid samples.
"""

from dataclasses import dataclass, field

import numpy as np

from . import harmonics, kernels
from .errors import InputError
from .sphere import SphericalGrid, build_grid


def _as_points(x, n: int) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != n:
        raise InputError(f"points have dimension {pts.shape[1]}, expected {n}")
    return pts, single


class SphericalFunction:
    """A real function on S^dim, either closed-form or grid-tabulated.

    Tabulated functions reproduce their node values exactly and interpolate
    in the grid chart (linear on S^1, bilinear with azimuthal wraparound and
    pole averaging on S^2, trilinear on S^3). Instances are immutable.
    """

    def __init__(self, dim: int, fn=None, grid: SphericalGrid | None = None, values=None):
        if (fn is None) == (grid is None):
            raise InputError("provide exactly one of fn or (grid, values)")
        self.dim = dim
        self._fn = fn
        self.grid = grid
        self.values = None
        if grid is not None:
            vals = np.asarray(values, dtype=np.float64)
            if vals.shape != (len(grid),):
                raise InputError("values length must match grid node count")
            if not np.all(np.isfinite(vals)):
                bad = int(np.flatnonzero(~np.isfinite(vals))[0])
                raise InputError(f"non-finite tabulated value at node {bad}")
            if grid.dim != dim:
                raise InputError("grid dimension does not match function dimension")
            self.values = vals
            self._chart = _build_chart(grid, vals)

    @classmethod
    def from_callable(cls, dim: int, fn) -> "SphericalFunction":
        return cls(dim, fn=fn)

    @classmethod
    def from_grid(cls, grid: SphericalGrid, values) -> "SphericalFunction":
        return cls(grid.dim, grid=grid, values=values)

    def evaluate(self, points):
        pts, single = _as_points(points, self.dim + 1)
        if self._fn is not None:
            out = np.asarray(self._fn(pts), dtype=np.float64)
        else:
            out = _chart_interp(self._chart, self.dim, pts)
        return float(out[0]) if single else out

    def node_values(self, grid: SphericalGrid) -> np.ndarray:
        """Values on a grid; identical array for a tabulation's own grid."""
        if self.grid is grid and self.values is not None:
            return self.values
        return self.evaluate(grid.nodes)

    def __call__(self, points):
        return self.evaluate(points)


def _build_chart(grid: SphericalGrid, vals: np.ndarray):
    """Augment the chart arrays so interpolation kernels never need wrap
    or pole logic: azimuth gets a wrap column, polar ends get averaged rows."""
    if grid.kind == "uniform_circle":
        (ang,) = grid.axes
        a = np.concatenate([ang, [ang[0] + 2.0 * np.pi]])
        v = np.concatenate([vals, vals[:1]])
        return (a, v)
    if grid.kind == "gauss_lonlat":
        colat, az = grid.axes
        v = vals.reshape(grid.shape)
        v = np.concatenate([v, v[:, :1]], axis=1)                    # azimuth wrap
        north = np.full((1, v.shape[1]), v[0].mean())
        south = np.full((1, v.shape[1]), v[-1].mean())
        v = np.concatenate([north, v, south], axis=0)                # pole averaging
        c0 = np.concatenate([[0.0], colat, [np.pi]])
        c1 = np.concatenate([az, [2.0 * np.pi]])
        return (c0, c1, v)
    if grid.kind == "gauss_s3":
        chi, colat, az = grid.axes
        v = vals.reshape(grid.shape)
        v = np.concatenate([v, v[:, :, :1]], axis=2)                 # azimuth wrap
        npole = v[:, :1, :].mean(axis=2, keepdims=True) * np.ones_like(v[:, :1, :])
        spole = v[:, -1:, :].mean(axis=2, keepdims=True) * np.ones_like(v[:, :1, :])
        v = np.concatenate([npole, v, spole], axis=1)                # sigma poles per slice
        top = np.full((1,) + v.shape[1:], vals.reshape(grid.shape)[0].mean())
        bot = np.full((1,) + v.shape[1:], vals.reshape(grid.shape)[-1].mean())
        v = np.concatenate([top, v, bot], axis=0)                    # chi poles
        c0 = np.concatenate([[0.0], chi, [np.pi]])
        c1 = np.concatenate([[0.0], colat, [np.pi]])
        c2 = np.concatenate([az, [2.0 * np.pi]])
        return (c0, c1, c2, v)
    raise InputError(f"no interpolation chart for grid kind {grid.kind!r}")


def _chart_interp(chart, dim: int, pts: np.ndarray) -> np.ndarray:
    if dim == 1:
        a, v = chart
        q = np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * np.pi)
        i = np.clip(np.searchsorted(a, q, side="right") - 1, 0, len(a) - 2)
        t = (q - a[i]) / (a[i + 1] - a[i])
        return (1 - t) * v[i] + t * v[i + 1]
    if dim == 2:
        c0, c1, v = chart
        q0 = np.arccos(np.clip(pts[:, 2], -1.0, 1.0))
        q1 = np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * np.pi)
        return kernels.bilinear(v, c0, c1, q0, q1)
    c0, c1, c2, v = chart
    cos_chi = np.clip(pts[:, 3], -1.0, 1.0)
    q0 = np.arccos(cos_chi)
    sin_chi = np.sqrt(np.maximum(0.0, 1.0 - cos_chi**2))
    safe = np.maximum(sin_chi, 1e-300)
    sig3 = np.clip(pts[:, 2] / safe, -1.0, 1.0)
    q1 = np.where(sin_chi < 1e-15, 0.0, np.arccos(sig3))
    q2 = np.where(sin_chi < 1e-15, 0.0, np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * np.pi))
    return kernels.trilinear(v, c0, c1, c2, q0, q1, q2)


# ---------------------------------------------------------------------------
# star bodies
# ---------------------------------------------------------------------------


class StarBody:
    """Base: a star body with positive continuous radial function on S^{dim-1}."""

    dim: int

    def radial(self, points):
        raise NotImplementedError

    def radial_points(self, points) -> np.ndarray:
        pts, _ = _as_points(points, self.dim)
        return np.asarray(self.radial(pts), dtype=np.float64)


@dataclass(frozen=True)
class Ball(StarBody):
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError("ball radius must be positive")

    def radial(self, points):
        pts, single = _as_points(points, self.dim)
        out = np.full(pts.shape[0], float(self.radius))
        return float(out[0]) if single else out


@dataclass(frozen=True)
class ShiftedBall(StarBody):
    """Ball of radius R centered at c with |c| < R, so the origin is interior."""

    dim: int
    center: tuple
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.shape != (self.dim,):
            raise InputError("center dimension mismatch")
        if np.linalg.norm(c) >= self.radius:
            raise InputError("shifted ball requires |center| < radius")
        object.__setattr__(self, "center", tuple(float(v) for v in c))

    def radial(self, points):
        pts, single = _as_points(points, self.dim)
        c = np.asarray(self.center)
        ct = pts @ c
        out = ct + np.sqrt(self.radius**2 - c @ c + ct * ct)
        return float(out[0]) if single else out


@dataclass(frozen=True)
class Ellipsoid(StarBody):
    dim: int
    semiaxes: tuple

    def __post_init__(self):
        a = np.asarray(self.semiaxes, dtype=np.float64)
        if a.shape != (self.dim,) or np.any(a <= 0):
            raise InputError("ellipsoid needs dim positive semiaxes")
        object.__setattr__(self, "semiaxes", tuple(float(v) for v in a))

    def radial(self, points):
        pts, single = _as_points(points, self.dim)
        a = np.asarray(self.semiaxes)
        out = 1.0 / np.sqrt(np.sum((pts / a) ** 2, axis=1))
        return float(out[0]) if single else out


@dataclass(frozen=True)
class HarmonicBody(StarBody):
    """base + sum of real orthonormal harmonic terms (degree, m_index, coef).

    Positivity of the radial function is checked by dense grid sampling at
    construction; parameter sets whose sampled minimum is <= 0 are rejected.
    """

    dim: int
    base: float
    terms: tuple = field(default=())

    def __post_init__(self):
        terms = tuple((int(l), int(mi), float(c)) for (l, mi, c) in self.terms)
        object.__setattr__(self, "terms", terms)
        grid = build_grid(self.dim - 1, 16 if self.dim == 4 else 48)
        sampled = self.radial(grid.nodes)
        if float(np.min(sampled)) <= 0.0:
            raise InputError("harmonic perturbation makes the radial function non-positive")

    def radial(self, points):
        pts, single = _as_points(points, self.dim)
        out = np.full(pts.shape[0], float(self.base))
        for l, mi, coef in self.terms:
            out = out + coef * harmonics.sph_harm(self.dim - 1, l, mi, pts)
        return float(out[0]) if single else out


@dataclass(frozen=True)
class TabulatedBody(StarBody):
    """Radial function given by positive samples on a grid."""

    dim: int
    fn: SphericalFunction

    def __post_init__(self):
        if self.fn.values is None:
            raise InputError("tabulated body needs a grid-backed function")
        bad = np.flatnonzero(self.fn.values <= 0.0)
        if bad.size:
            raise InputError(f"non-positive radial value at node {int(bad[0])}")

    @classmethod
    def from_samples(cls, grid: SphericalGrid, values) -> "TabulatedBody":
        return cls(grid.dim + 1, SphericalFunction.from_grid(grid, values))

    def radial(self, points):
        out = self.fn.evaluate(points)
        arr = np.atleast_1d(np.asarray(out))
        if np.any(arr <= 0.0):
            bad = int(np.flatnonzero(arr <= 0.0)[0])
            raise InputError(f"interpolated radial value non-positive at query {bad}")
        return out


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------


def radial(body: StarBody, theta) -> float:
    """Radial function of the body in direction theta."""
    return body.radial(np.asarray(theta, dtype=np.float64))


def power_function(body: StarBody, k: int) -> SphericalFunction:
    """The integrand of k-dimensional section volumes: theta -> radial^k."""
    if not (1 <= k <= body.dim - 1):
        raise InputError(f"power k={k} out of range for dimension {body.dim}")
    return SphericalFunction.from_callable(body.dim - 1, lambda pts: body.radial_points(pts) ** k)


def tabulate(body_or_fn, grid: SphericalGrid) -> SphericalFunction:
    """Sample a body's radial function (or a spherical function) onto a grid."""
    if isinstance(body_or_fn, StarBody):
        if body_or_fn.dim != grid.dim + 1:
            raise InputError("body and grid dimensions do not match")
        vals = body_or_fn.radial_points(grid.nodes)
    elif isinstance(body_or_fn, SphericalFunction):
        if body_or_fn.dim != grid.dim:
            raise InputError("function and grid dimensions do not match")
        vals = body_or_fn.node_values(grid)
    else:
        vals = np.asarray(body_or_fn(grid.nodes), dtype=np.float64)
    return SphericalFunction.from_grid(grid, vals)
