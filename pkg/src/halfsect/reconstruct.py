"""Reconstruction pipelines: hemisphere split / evenize / invert, radial
recovery from half-section volumes, and the reduced-family pipeline that
reconstructs from a dimension-matched product of two sphere grids.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .bodies import SphericalFunction, TabulatedBody
from .errors import InputError, NumericalError
from .harmonics import HarmonicSpectrum, analyze_values, degrees, sh_matrix, synthesize_on_grid
from .inversion import FunkInversion, funk_inverse_harmonic, funk_multiplier
from .sphere import SphericalGrid, build_grid
from .transforms import HemiDataset, SectionFrame

DEFAULT_BAND = 0.15        # latitude half-width of the equator blend, radians
DEFAULT_TP_FLOOR = 0.05    # below this |theta'| the reduced chart degenerates


# ---------------------------------------------------------------------------
# scattered data -> grid
# ---------------------------------------------------------------------------


def fit_scattered_to_grid(us: np.ndarray, values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Inverse-distance fit over the 4 nearest frames.

    Half-section data are even in the section normal, so every sample is
    mirrored to its antipode before fitting.
    """
    data = np.vstack([us, -us])
    vals = np.concatenate([values, values])
    tree = cKDTree(data)
    dist, idx = tree.query(nodes, k=4)
    w = 1.0 / np.maximum(dist, 1e-12)
    w /= w.sum(axis=1, keepdims=True)
    return np.sum(vals[idx] * w, axis=1)


# ---------------------------------------------------------------------------
# full-mode pipeline (k = n-1, desk scale n = 3)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HemiInversion:
    """Per-hemisphere inversions plus the blended assembly."""

    function: SphericalFunction
    plus: FunkInversion
    minus: FunkInversion
    grid: SphericalGrid
    band: float
    diagnostics: dict


def _blend_weight(zcoord: np.ndarray, band: float) -> np.ndarray:
    """Linear-in-latitude weight of the upper-hemisphere reconstruction."""
    lat = np.arcsin(np.clip(zcoord, -1.0, 1.0))
    return np.clip((lat + band) / (2.0 * band), 0.0, 1.0)


def _assemble(plus: FunkInversion, minus: FunkInversion, band: float) -> SphericalFunction:
    def fn(pts):
        pts = np.atleast_2d(pts)
        w = _blend_weight(pts[:, -1], band)
        return w * plus.function.evaluate(pts) + (1.0 - w) * minus.function.evaluate(pts)

    return SphericalFunction.from_callable(2, fn)


def invert_hemispherical_parts(
    data: HemiDataset, lmax: int, grid_res: int | None = None, band: float = DEFAULT_BAND
) -> HemiInversion:
    """Fit the paired transform values to a grid of section normals, invert
    each sign separately (2 x the inverse transform of the evenized data),
    and blend across the equator band.

    The upper-hemisphere output depends only on plus records and vice versa.
    """
    if data.mode != "full" or data.n != 3:
        raise InputError("hemispherical inversion expects a full-mode dataset on S^2 (n=3)")
    min_geoms = 2 * (lmax + 1) ** 2
    if data.geometry_count() < min_geoms // 4:
        raise InputError(
            f"{data.geometry_count()} frame geometries cannot resolve L_max={lmax}; "
            f"recommended at least {min_geoms}"
        )
    grid = build_grid(2, grid_res if grid_res is not None else max(2 * lmax, 16))
    us, vp, vm = data.paired_arrays()
    fit_p = fit_scattered_to_grid(us, vp, grid.nodes)
    fit_m = fit_scattered_to_grid(us, vm, grid.nodes)
    inv_p = funk_inverse_harmonic(SphericalFunction.from_grid(grid, 2.0 * fit_p), lmax, grid)
    inv_m = funk_inverse_harmonic(SphericalFunction.from_grid(grid, 2.0 * fit_m), lmax, grid)
    diagnostics = {
        "odd_energy_fraction_plus": inv_p.odd_energy_fraction,
        "odd_energy_fraction_minus": inv_m.odd_energy_fraction,
        "band": band,
        "grid_shape": grid.shape,
        "frame_geometries": data.geometry_count(),
    }
    return HemiInversion(_assemble(inv_p, inv_m, band), inv_p, inv_m, grid, band, diagnostics)


def invert_from_hemispherical(
    data: HemiDataset, lmax: int, grid_res: int | None = None, band: float = DEFAULT_BAND
) -> SphericalFunction:
    """Recover a function on S^2 from paired hemispherical transform values:
    twice the inverse transform of each sign's data on its own hemisphere,
    joined by continuity across the equator band."""
    return invert_hemispherical_parts(data, lmax, grid_res, band).function


@dataclass(frozen=True)
class ReconstructionResult:
    """Recovered radial function plus per-run diagnostics."""

    radial: TabulatedBody
    power: SphericalFunction
    grid: SphericalGrid
    backend: str
    diagnostics: dict
    warnings: tuple = field(default=())


def _power_to_radial(power_vals: np.ndarray, grid: SphericalGrid, k: int, backend: str, diagnostics: dict):
    mx = float(np.max(power_vals))
    eps = 1e-6 * max(mx, 1e-300)
    soft = np.flatnonzero((power_vals <= 0.0) & (power_vals > -eps))
    hard = np.flatnonzero(power_vals <= -eps)
    clamped = np.maximum(power_vals, eps)
    warnings = []
    if soft.size:
        warnings.append(f"clamped {soft.size} non-positive power values within tolerance: nodes {soft[:20].tolist()}")
    if hard.size:
        warnings.append(
            f"{hard.size} power values below -{eps:.3e} clamped: nodes {hard[:20].tolist()}"
        )
    n_clamp = soft.size + hard.size
    if n_clamp > 0.05 * power_vals.size:
        raise NumericalError(
            f"{n_clamp} of {power_vals.size} nodes needed positivity clamping; reconstruction rejected"
        )
    rho = clamped ** (1.0 / k)
    body = TabulatedBody.from_samples(grid, rho)
    diagnostics = dict(diagnostics)
    diagnostics["clamped_nodes"] = int(n_clamp)
    return ReconstructionResult(
        body,
        SphericalFunction.from_grid(grid, power_vals),
        grid,
        backend,
        diagnostics,
        tuple(warnings),
    )


def reconstruct_radial(
    data: HemiDataset,
    k: int | None = None,
    lmax: int = 16,
    grid_res: int | None = None,
    band: float = DEFAULT_BAND,
) -> ReconstructionResult:
    """Radial function from half-section volumes: per hemisphere the k-th
    power of the radial equals 2k times the inverse transform of the volume
    data; equator nodes are filled by the continuity blend, then the
    positive k-th root is taken nodewise."""
    if k is None:
        k = data.k
    if k != data.k:
        raise InputError(f"requested k={k} but dataset has k={data.k}")
    scaled = HemiDataset(
        data.n,
        data.k,
        data.mode,
        tuple((frame, k * value) for frame, value in data.records),
    )
    parts = invert_hemispherical_parts(scaled, lmax, grid_res, band)
    grid = parts.grid
    vals_p = synthesize_on_grid(parts.plus.spectrum, grid)
    vals_m = synthesize_on_grid(parts.minus.spectrum, grid)
    w = _blend_weight(grid.nodes[:, 2], band)
    power_vals = w * vals_p + (1.0 - w) * vals_m
    diag = dict(parts.diagnostics)
    diag["lmax"] = lmax
    return _power_to_radial(power_vals, grid, k, "harmonic", diag)


# ---------------------------------------------------------------------------
# reduced-mode pipeline (2 <= k < n-1, desk scale n = 4, k = 2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedFrameSet:
    """Product family of reduced frames: directions v on the sphere of the
    first n-k coordinates crossed with section normals w on the k-sphere."""

    n: int
    k: int
    v_grid: SphericalGrid
    w_grid: SphericalGrid

    def __post_init__(self):
        if self.v_grid.dim != self.n - self.k - 1 or self.w_grid.dim != self.k:
            raise InputError("frame-set grid dimensions inconsistent with (n, k)")
        # the family is (n-1)-dimensional: (n-k-1) + (k-1) + 1 = n - 1
        assert (self.n - self.k - 1) + (self.k - 1) + 1 == self.n - 1

    def frame_count(self) -> int:
        return len(self.v_grid) * len(self.w_grid)

    def frames(self) -> list[SectionFrame]:
        out = []
        for v in self.v_grid.nodes:
            for w in self.w_grid.nodes:
                out.append(SectionFrame(self.n, self.k, "reduced", +1, v=tuple(v), w=tuple(w)))
        return out


def build_reduced_frames(n: int, k: int, v_res: int, w_res: int) -> ReducedFrameSet:
    if k == n - 1:
        raise InputError("k = n-1 is the full mode; reduced frames need k < n-1")
    if not (2 <= k < n - 1):
        raise InputError(f"reduced frames need 2 <= k < n-1, got n={n}, k={k}")
    if v_res < 8 or w_res < 8:
        raise InputError("frame-set resolutions must be at least 8")
    return ReducedFrameSet(n, k, build_grid(n - k - 1, v_res), build_grid(k, w_res))


def _match_grid(nodes: np.ndarray, dim: int) -> tuple[SphericalGrid, np.ndarray]:
    """Rebuild the quadrature grid a node array came from, tolerating
    reordering; returns the grid and the position of each input row in it."""
    if dim == 1:
        res = nodes.shape[0]
        grid = build_grid(1, res)
    else:
        res = int(round(math.sqrt(nodes.shape[0] / 2)))
        grid = build_grid(2, res)
    if grid.nodes.shape != nodes.shape:
        raise InputError("dataset frames do not form a recognized product grid")
    dist, perm = cKDTree(grid.nodes).query(nodes, k=1)
    if np.max(dist) > 1e-9 or np.unique(perm).size != len(perm):
        raise InputError("dataset frames do not form a recognized product grid")
    return grid, perm


def _invert_on_wgrid(values: np.ndarray, grid: SphericalGrid, lmax: int):
    """Divide the even part of the spectrum by the transform eigenvalues."""
    spec = analyze_values(values, grid, lmax)
    degs = degrees(lmax)
    even = degs % 2 == 0
    total = float(np.sum(spec.coeffs**2))
    odd_frac = float(np.sum(spec.coeffs[~even] ** 2)) / total if total > 0 else 0.0
    lam = np.array([funk_multiplier(l) if l % 2 == 0 else np.inf for l in range(lmax + 1)])
    coeffs = np.zeros_like(spec.coeffs)
    coeffs[even] = spec.coeffs[even] / lam[degs[even]]
    return HarmonicSpectrum(2, lmax, coeffs), odd_frac


@dataclass(frozen=True)
class ReducedEvaluator:
    """Reassembled reconstruction over S^{n-1}, evaluable at arbitrary points.

    Holds one pair of per-hemisphere spectra for every v node; evaluation
    rotates a query back into the reduced chart, synthesizes on the two
    bracketing v spheres and interpolates linearly in the v angle.
    """

    n: int
    k: int
    v_angles: np.ndarray
    spectra_plus: tuple
    spectra_minus: tuple
    band: float
    tp_floor: float

    def power_at(self, points: np.ndarray):
        """(values, valid mask, reassembly residual) at unit points."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        nk = self.n - self.k
        tp = np.linalg.norm(pts[:, :nk], axis=1)
        valid = tp > self.tp_floor
        out = np.zeros(pts.shape[0])
        if not np.any(valid):
            return out, valid, 0.0
        q = pts[valid]
        tpv = tp[valid]
        v_dir = q[:, :nk] / tpv[:, None]
        y = np.concatenate([tpv[:, None], q[:, nk:]], axis=1)
        # chart identity: rotating e_{n-k} onto v carries y back to the query
        rebuilt = np.concatenate([y[:, :1] * v_dir, y[:, 1:]], axis=1)
        resid = float(np.max(np.abs(rebuilt - q)))
        ang = np.arctan2(v_dir[:, 1], v_dir[:, 0]) % (2.0 * np.pi)
        m_v = self.v_angles.shape[0]
        h = 2.0 * np.pi / m_v
        i0 = np.floor(ang / h).astype(np.int64) % m_v
        i1 = (i0 + 1) % m_v
        frac = (ang - i0 * h) / h
        wb = _blend_weight(y[:, -1], self.band)
        vals = np.zeros((2, q.shape[0]))
        for slot, ii in enumerate((i0, i1)):
            for i in np.unique(ii):
                sel = ii == i
                ymat = sh_matrix(y[sel], self.spectra_plus[i].lmax)
                fp = ymat @ self.spectra_plus[i].coeffs
                fm = ymat @ self.spectra_minus[i].coeffs
                vals[slot, sel] = wb[sel] * fp + (1.0 - wb[sel]) * fm
        out[valid] = (1.0 - frac) * vals[0] + frac * vals[1]
        return out, valid, resid


def reconstruct_from_reduced(
    data: HemiDataset,
    lmax: int = 16,
    out_res: int = 16,
    band: float = DEFAULT_BAND,
    tp_floor: float = DEFAULT_TP_FLOOR,
) -> ReconstructionResult:
    """Reconstruct the radial function from reduced-family half-section
    volumes (n = 4, k = 2).

    For every v node the w-indexed data are inverted on the k-sphere exactly
    as in the full pipeline; a point theta with |theta'| above the chart
    floor is evaluated by mapping it to (v, y) with v = theta'/|theta'| and
    y = (|theta'|, theta''), interpolating between the nearest v nodes.
    Points under the floor are filled by continuity from the nearest
    reconstructed ring, then the k-th root is taken as usual.
    """
    if data.mode != "reduced":
        raise InputError("reduced reconstruction needs a reduced-mode dataset")
    if data.n != 4 or data.k != 2:
        raise InputError("reduced reconstruction is implemented for n=4, k=2")
    k = data.k
    (vs, ws), vp, vm = data.paired_arrays()
    v_rows, v_index = np.unique(vs, axis=0, return_inverse=True)
    v_grid, v_perm = _match_grid(v_rows, 1)
    v_index = v_perm[v_index]          # data row -> v grid position
    n_v = len(v_grid)
    counts = np.bincount(v_index, minlength=n_v)
    if np.any(counts != counts[0]):
        raise InputError("reduced dataset does not cover the frame set uniformly")
    spectra_p, spectra_m = [], []
    odd_fracs = []
    w_grid = None
    for i in range(n_v):
        sel = v_index == i
        w_nodes = ws[sel]
        w_grid, w_perm = _match_grid(w_nodes, 2) if w_grid is None else (w_grid, None)
        if w_perm is None:
            dist, w_perm = cKDTree(w_grid.nodes).query(w_nodes, k=1)
            if np.max(dist) > 1e-9 or np.unique(w_perm).size != len(w_perm):
                raise InputError("w frames differ between v nodes")
        phi_p = np.empty(len(w_grid))
        phi_m = np.empty(len(w_grid))
        phi_p[w_perm] = 2.0 * k * vp[sel]
        phi_m[w_perm] = 2.0 * k * vm[sel]
        sp, of_p = _invert_on_wgrid(phi_p, w_grid, lmax)
        sm, of_m = _invert_on_wgrid(phi_m, w_grid, lmax)
        spectra_p.append(sp)
        spectra_m.append(sm)
        odd_fracs.append((of_p, of_m))
    evaluator = ReducedEvaluator(
        data.n, k, np.arctan2(v_grid.nodes[:, 1], v_grid.nodes[:, 0]) % (2.0 * np.pi),
        tuple(spectra_p), tuple(spectra_m), band, tp_floor,
    )
    grid = build_grid(3, out_res)
    power_vals, valid, resid = evaluator.power_at(grid.nodes)
    # chart-floor fill: average of the nearest reconstructed ring
    invalid = np.flatnonzero(~valid)
    if invalid.size:
        good = np.flatnonzero(valid)
        cosang = grid.nodes[invalid] @ grid.nodes[good].T
        dmin = np.arccos(np.clip(cosang.max(axis=1), -1.0, 1.0))
        ring = np.arccos(np.clip(cosang, -1.0, 1.0)) <= (dmin[:, None] + 0.02)
        power_vals[invalid] = (ring * power_vals[good][None, :]).sum(axis=1) / ring.sum(axis=1)
    diag = {
        "reassembly_max_residual": resid,
        "tp_floor": tp_floor,
        "band": band,
        "lmax": lmax,
        "v_nodes": n_v,
        "w_grid_shape": w_grid.shape,
        "filled_nodes": int(invalid.size),
        "odd_energy_fraction_max": float(np.max(odd_fracs)),
    }
    result = _power_to_radial(power_vals, grid, k, "harmonic-reduced", diag)
    return result
