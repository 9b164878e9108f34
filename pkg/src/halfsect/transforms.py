"""Forward transforms: great-circle integrals, their hemispherical halves,
half-section volumes, the reduced family on a product of two spheres, and
dataset simulation.

Quadrature layout. A half great circle is integrated by a composite midpoint
rule whose nodes lie strictly inside the open half (never on the equator,
where integrands may jump). The minus-half nodes are exact antipodes of the
plus-half nodes, and the full-circle rule with m points is the union of the
two (m/2)-point half rules. Consequently the partition, reflection and
evenization identities between the full and hemispherical transforms hold to
rounding error when node counts are nested, not merely to quadrature order.
"""

from dataclasses import dataclass, field

import numpy as np

from .bodies import SphericalFunction, StarBody, power_function
from .errors import DegenerateFrameError, DegenerateSaturationError, InputError
from .sphere import unit_vector

DEGENERACY_TOL = 1e-9
MIN_QUAD = 16


def _coerce_fn(f, dim: int):
    if isinstance(f, SphericalFunction):
        if f.dim != dim:
            raise InputError(f"function lives on S^{f.dim}, expected S^{dim}")
        return f.evaluate
    if callable(f):
        return lambda pts: np.asarray(f(pts), dtype=np.float64)
    raise InputError("expected a SphericalFunction or a callable")


def _circle_basis(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Orthonormal basis (b1, b2) of the plane orthogonal to u in R^3 with
    b1 in the equator plane and b2 carrying the full polar component: along
    the circle theta(t) = b2 cos t + b1 sin t the last coordinate is
    a cos t with a = sqrt(1 - u3^2)."""
    a = float(np.hypot(u[0], u[1]))
    if a < DEGENERACY_TOL:
        raise DegenerateFrameError("equatorial frame: section normal is aligned with the pole")
    b1 = np.array([-u[1], u[0], 0.0]) / a
    b2 = np.cross(u, b1)
    return b1, b2, a


def half_circle_nodes(u, m: int) -> tuple[np.ndarray, float]:
    """Midpoint nodes of the open plus-half of the great circle normal to u.

    Returns (points (m, 3), weight); the minus half is the pointwise antipode.
    """
    u = unit_vector(u, 3)
    if m < MIN_QUAD:
        raise InputError(f"quadrature count m={m} below minimum {MIN_QUAD}")
    b1, b2, _ = _circle_basis(u)
    t = -np.pi / 2 + (np.arange(m) + 0.5) * (np.pi / m)
    pts = np.outer(np.cos(t), b2) + np.outer(np.sin(t), b1)
    return pts, np.pi / m


def funk_transform(f, u, m: int = 256) -> float:
    """Integral of f over the great circle orthogonal to u (S^2 case).

    Uses an m-point uniform rule; for non-degenerate u the nodes are the
    union of the two half-circle rules so hemispherical sums nest exactly.
    """
    u = unit_vector(u, 3)
    if m < MIN_QUAD:
        raise InputError(f"quadrature count m={m} below minimum {MIN_QUAD}")
    fn = _coerce_fn(f, 2)
    me = m + (m % 2)
    if abs(u[2]) < 1.0 - DEGENERACY_TOL:
        pts, w = half_circle_nodes(u, me // 2)
        return float(w * (np.sum(fn(pts)) + np.sum(fn(-pts))))
    # polar normal: the circle is the equator, no hemisphere structure; use
    # the same midpoint layout with a basis seeded from e1
    b1 = np.array([0.0, -u[2], u[1]])
    b1 /= np.linalg.norm(b1)
    b2 = np.cross(u, b1)
    t = -np.pi / 2 + (np.arange(me) + 0.5) * (2.0 * np.pi / me)
    pts = np.outer(np.cos(t), b2) + np.outer(np.sin(t), b1)
    return float(2.0 * np.pi / me * np.sum(fn(pts)))


def hemi_funk(f, u, sign, m: int = 256) -> float:
    """Integral of f over the open half great circle {theta in u-perp :
    sign * theta_n > 0}."""
    s = _norm_sign(sign)
    fn = _coerce_fn(f, 2)
    pts, w = half_circle_nodes(u, m)
    if s < 0:
        pts = -pts
    return float(w * np.sum(fn(pts)))


def _norm_sign(sign) -> int:
    if sign in (1, +1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise InputError(f"sign must be + or -, got {sign!r}")


def reduced_hemi_funk(f, v, w, sign, m: int = 256, n: int | None = None, k: int = 2) -> float:
    """Hemispherical integral over the reduced section family.

    The function f on S^{n-1} is pulled back to the k-sphere spanned by the
    last k+1 coordinate directions after rotating e_{n-k} onto v, and
    integrated over the open half great circle of that sphere orthogonal to
    w, the half selected by the sign of the last coordinate. Desk scale is
    k = 2 (half great circles inside an embedded S^2).
    """
    if k != 2:
        raise InputError("reduced transforms are implemented for k = 2")
    v = unit_vector(np.asarray(v, dtype=np.float64))
    w = unit_vector(np.asarray(w, dtype=np.float64), k + 1)
    if n is None:
        n = v.shape[0] + k
    if v.shape[0] != n - k:
        raise InputError(f"v has dimension {v.shape[0]}, expected {n - k}")
    fn = _coerce_fn(f, n - 1)
    s = _norm_sign(sign)
    ypts, wq = half_circle_nodes(w, m)
    if s < 0:
        ypts = -ypts
    pts = np.zeros((m, n))
    pts[:, : n - k] = np.outer(ypts[:, 0], v)
    pts[:, n - k :] = ypts[:, 1:]
    return float(wq * np.sum(fn(pts)))


# ---------------------------------------------------------------------------
# frames and datasets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionFrame:
    """Identifier of one half-section.

    Full mode (k = n-1): the section subspace is the hyperplane orthogonal
    to the unit normal u, which must not be aligned with the pole e_n.
    Reduced mode: the pair (v, w) with v on the sphere of the first n-k
    coordinates and w on the k-sphere of the last k+1, as used by the
    reduced transform. ``sign`` selects the open half.
    """

    n: int
    k: int
    mode: str
    sign: int
    u: tuple | None = None
    v: tuple | None = None
    w: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "sign", _norm_sign(self.sign))
        if self.mode == "full":
            if self.k != self.n - 1:
                raise InputError("full-mode frames require k = n-1")
            if self.u is None:
                raise InputError("full-mode frames need a normal u")
            u = unit_vector(np.asarray(self.u, dtype=np.float64), self.n)
            if abs(u[-1]) >= 1.0 - DEGENERACY_TOL:
                raise DegenerateFrameError("equatorial frame: |u . e_n| too close to 1")
            object.__setattr__(self, "u", tuple(float(x) for x in u))
        elif self.mode == "reduced":
            if not (2 <= self.k < self.n - 1):
                raise InputError("reduced-mode frames require 2 <= k < n-1")
            if self.v is None or self.w is None:
                raise InputError("reduced-mode frames need the pair (v, w)")
            v = unit_vector(np.asarray(self.v, dtype=np.float64), self.n - self.k)
            w = unit_vector(np.asarray(self.w, dtype=np.float64), self.k + 1)
            if abs(w[-1]) >= 1.0 - DEGENERACY_TOL:
                raise DegenerateFrameError("equatorial frame: reduced split is degenerate")
            object.__setattr__(self, "v", tuple(float(x) for x in v))
            object.__setattr__(self, "w", tuple(float(x) for x in w))
        else:
            raise InputError(f"unknown frame mode {self.mode!r}")

    def geometry_key(self) -> tuple:
        if self.mode == "full":
            return ("full", self.u)
        return ("reduced", self.v, self.w)

    def with_sign(self, sign) -> "SectionFrame":
        return SectionFrame(self.n, self.k, self.mode, _norm_sign(sign), self.u, self.v, self.w)


@dataclass(frozen=True)
class HemiDataset:
    """Paired hemispherical records: for every frame geometry both signs.

    Values are in surface-measure units (transform values or half-section
    volumes, depending on the producing pipeline).
    """

    n: int
    k: int
    mode: str
    records: tuple = field(default=())

    def __post_init__(self):
        seen: dict[tuple, dict[int, float]] = {}
        order: list[tuple] = []
        for idx, (frame, value) in enumerate(self.records):
            if (frame.n, frame.k, frame.mode) != (self.n, self.k, self.mode):
                raise InputError(f"record {idx} disagrees with dataset (n, k, mode)")
            if not np.isfinite(value):
                raise InputError(f"record {idx} has a non-finite value")
            key = frame.geometry_key()
            if key not in seen:
                seen[key] = {}
                order.append(key)
            if frame.sign in seen[key]:
                raise InputError(f"duplicate sign {frame.sign} for frame geometry {idx}")
            seen[key][frame.sign] = float(value)
        for key in order:
            if len(seen[key]) != 2:
                raise InputError("unpaired records: every frame geometry needs both signs")
        object.__setattr__(self, "_by_geometry", (order, seen))

    def __len__(self) -> int:
        return len(self.records)

    def geometry_count(self) -> int:
        return len(self._by_geometry[0])

    def paired_arrays(self):
        """(geometry array(s), values_plus, values_minus) in first-seen order."""
        order, seen = self._by_geometry
        vp = np.array([seen[key][1] for key in order])
        vm = np.array([seen[key][-1] for key in order])
        if self.mode == "full":
            us = np.array([key[1] for key in order])
            return us, vp, vm
        vs = np.array([key[1] for key in order])
        ws = np.array([key[2] for key in order])
        return (vs, ws), vp, vm


def fibonacci_directions(count: int) -> np.ndarray:
    """Deterministic low-discrepancy directions on S^2 (golden-angle spiral).

    Index i maps to latitude stratum z = 1 - (2i+1)/count and azimuth
    i * pi * (3 - sqrt 5); the sequence is reproducible from the index alone.
    """
    if count < 1:
        raise InputError("need at least one direction")
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    ang = np.pi * (3.0 - np.sqrt(5.0)) * i
    return np.stack([r * np.cos(ang), r * np.sin(ang), z], axis=-1)


def full_frames_detailed(n: int, count: int) -> tuple[list[SectionFrame], list[int]]:
    """Plus-sign full-mode frames with low-discrepancy normals (n = 3),
    plus the indices of any frames skipped as degenerate."""
    if n != 3:
        raise InputError("full-mode frame generation is implemented for n = 3")
    frames = []
    skipped = []
    for idx, u in enumerate(fibonacci_directions(count)):
        try:
            frames.append(SectionFrame(n, n - 1, "full", +1, u=tuple(u)))
        except DegenerateFrameError:
            skipped.append(idx)
    if skipped and len(skipped) > 0.1 * count:
        raise DegenerateSaturationError(
            f"{len(skipped)} of {count} frames degenerate (indices {skipped[:10]}...)"
        )
    return frames, skipped


def full_frames(n: int, count: int) -> list[SectionFrame]:
    return full_frames_detailed(n, count)[0]


def half_section_volume(body: StarBody, frame: SectionFrame, m: int = 256) -> float:
    """k-volume of the body's intersection with the frame's open half-section:
    (1/k) times the hemispherical integral of radial^k over the half circle."""
    if body.dim != frame.n:
        raise InputError("body and frame dimensions do not match")
    k = frame.k
    rk = power_function(body, k)
    if frame.mode == "full":
        return hemi_funk(rk, np.asarray(frame.u), frame.sign, m) / k
    return reduced_hemi_funk(rk, np.asarray(frame.v), np.asarray(frame.w), frame.sign, m, n=frame.n, k=k) / k


def _batched_full_volumes(body: StarBody, us: np.ndarray, k: int, m: int):
    """Vectorized plus/minus half-section volumes over many full-mode normals."""
    a = np.hypot(us[:, 0], us[:, 1])
    b1 = np.stack([-us[:, 1], us[:, 0], np.zeros(len(us))], axis=-1) / a[:, None]
    b2 = np.cross(us, b1)
    t = -np.pi / 2 + (np.arange(m) + 0.5) * (np.pi / m)
    pts = b2[:, None, :] * np.cos(t)[None, :, None] + b1[:, None, :] * np.sin(t)[None, :, None]
    flat = pts.reshape(-1, 3)
    rk = body.radial_points(flat) ** k
    rk_m = body.radial_points(-flat) ** k
    w = np.pi / m / k
    return rk.reshape(len(us), m).sum(axis=1) * w, rk_m.reshape(len(us), m).sum(axis=1) * w


def _batched_reduced_volumes(body: StarBody, vs: np.ndarray, ws: np.ndarray, k: int, m: int):
    """Vectorized reduced-mode volumes for a common v over many w normals."""
    n = body.dim
    a = np.hypot(ws[:, 0], ws[:, 1])
    b1 = np.stack([-ws[:, 1], ws[:, 0], np.zeros(len(ws))], axis=-1) / a[:, None]
    b2 = np.cross(ws, b1)
    t = -np.pi / 2 + (np.arange(m) + 0.5) * (np.pi / m)
    ypts = b2[:, None, :] * np.cos(t)[None, :, None] + b1[:, None, :] * np.sin(t)[None, :, None]
    pts = np.zeros(ypts.shape[:2] + (n,))
    pts[..., : n - k] = ypts[..., 0, None] * vs[None, None, :]
    pts[..., n - k :] = ypts[..., 1:]
    flat = pts.reshape(-1, n)
    w = np.pi / m / k
    rp = (body.radial_points(flat) ** k).reshape(len(ws), m).sum(axis=1) * w
    rm = (body.radial_points(-flat) ** k).reshape(len(ws), m).sum(axis=1) * w
    return rp, rm


def simulate_dataset(body: StarBody, frames, m: int = 256) -> HemiDataset:
    """Half-section volumes for every frame geometry, both signs.

    Record order is the input frame order with the plus record first;
    independent of any internal batching, the output is deterministic.
    """
    frames = list(frames)
    if not frames:
        raise InputError("no frames supplied")
    n, k, mode = frames[0].n, frames[0].k, frames[0].mode
    for idx, fr in enumerate(frames):
        if (fr.n, fr.k, fr.mode) != (n, k, mode):
            raise InputError(f"frame {idx} breaks (n, k, mode) homogeneity")
    if body.dim != n:
        raise InputError("body dimension does not match the frames")
    values: dict[int, tuple[float, float]] = {}
    if mode == "full" and n == 3:
        us = np.array([fr.u for fr in frames])
        vp, vm = _batched_full_volumes(body, us, k, m)
        values = {i: (float(vp[i]), float(vm[i])) for i in range(len(frames))}
    elif mode == "reduced" and k == 2:
        groups: dict[tuple, list[int]] = {}
        for i, fr in enumerate(frames):
            groups.setdefault(fr.v, []).append(i)
        for vkey, idxs in groups.items():
            ws = np.array([frames[i].w for i in idxs])
            vp, vm = _batched_reduced_volumes(body, np.asarray(vkey), ws, k, m)
            for j, i in enumerate(idxs):
                values[i] = (float(vp[j]), float(vm[j]))
    else:
        for idx, fr in enumerate(frames):
            try:
                values[idx] = (
                    half_section_volume(body, fr.with_sign(+1), m),
                    half_section_volume(body, fr.with_sign(-1), m),
                )
            except (DegenerateFrameError, InputError) as exc:
                raise type(exc)(f"frame {idx}: {exc}") from exc
    records = []
    for i, fr in enumerate(frames):
        p_val, m_val = values[i]
        records.append((fr.with_sign(+1), p_val))
        records.append((fr.with_sign(-1), m_val))
    return HemiDataset(n, k, mode, tuple(records))


def hemi_transform_dataset(f, frames, m: int = 256) -> HemiDataset:
    """Hemispherical transform values of a spherical function over frames
    (both signs); the reconstruction-side input when data are not volumes."""
    frames = list(frames)
    n, k, mode = frames[0].n, frames[0].k, frames[0].mode
    records = []
    for fr in frames:
        if mode == "full":
            vp = hemi_funk(f, np.asarray(fr.u), +1, m)
            vm = hemi_funk(f, np.asarray(fr.u), -1, m)
        else:
            vp = reduced_hemi_funk(f, np.asarray(fr.v), np.asarray(fr.w), +1, m, n=n, k=k)
            vm = reduced_hemi_funk(f, np.asarray(fr.v), np.asarray(fr.w), -1, m, n=n, k=k)
        records.append((fr.with_sign(+1), vp))
        records.append((fr.with_sign(-1), vm))
    return HemiDataset(n, k, mode, tuple(records))


def evenized(f, dim: int = 2) -> SphericalFunction:
    """The even function equal to f on the open upper hemisphere and to
    f(-theta) on the lower one (equator points take the upper branch)."""
    fn = _coerce_fn(f, dim)

    def wrapper(pts):
        pts = np.atleast_2d(pts)
        flip = pts[:, -1] < 0.0
        q = np.where(flip[:, None], -pts, pts)
        return fn(q)

    return SphericalFunction.from_callable(dim, wrapper)


def reflected(f, dim: int = 2) -> SphericalFunction:
    """theta -> f(-theta)."""
    fn = _coerce_fn(f, dim)
    return SphericalFunction.from_callable(dim, lambda pts: fn(-np.atleast_2d(pts)))
