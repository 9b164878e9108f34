import numpy as np
import pytest
from scipy.integrate import quad

from halfsect import (
    Ball,
    DegenerateFrameError,
    Ellipsoid,
    HemiDataset,
    InputError,
    SectionFrame,
    ShiftedBall,
    SphericalFunction,
    evenized,
    fibonacci_directions,
    full_frames,
    funk_transform,
    half_section_volume,
    hemi_funk,
    reduced_hemi_funk,
    reflected,
    simulate_dataset,
)

from conftest import random_band_limited, random_unit


def const_fn(dim=2):
    return SphericalFunction.from_callable(dim, lambda p: np.ones(len(p)))


def circle_param(u):
    """Reference parameterization of the great circle orthogonal to u with
    theta_3 = a*cos(t); independent of the implementation's node layout."""
    u = np.asarray(u, dtype=np.float64)
    a = np.hypot(u[0], u[1])
    b1 = np.array([-u[1], u[0], 0.0]) / a
    b2 = np.cross(u, b1)
    return lambda t: np.cos(t) * b2 + np.sin(t) * b1


def quad_oracle_hemi(f, u, sign, tol=1e-12):
    """Independent 1-d adaptive quadrature over the half circle."""
    gamma = circle_param(u)
    lo, hi = (-np.pi / 2, np.pi / 2) if sign > 0 else (np.pi / 2, 3 * np.pi / 2)
    val, err = quad(lambda t: float(f.evaluate(gamma(t))), lo, hi, epsabs=tol, limit=200)
    return val


# -- full transform ----------------------------------------------------------


def test_funk_constant(rng):
    for _ in range(5):
        u = random_unit(rng)
        assert abs(funk_transform(const_fn(), u, 128) - 2 * np.pi) < 1e-12
    # degenerate normal works for the plain transform
    assert abs(funk_transform(const_fn(), np.array([0.0, 0.0, 1.0]), 128) - 2 * np.pi) < 1e-12


def test_funk_annihilates_odd(rng):
    f3 = SphericalFunction.from_callable(2, lambda p: p[:, 2])
    for _ in range(5):
        assert abs(funk_transform(f3, random_unit(rng), 64)) < 1e-12
    fodd, _ = random_band_limited(rng, 7, parity="odd")
    sup = np.max(np.abs(fodd.evaluate(random_unit(rng, 3, size=400))))
    for _ in range(10):
        assert abs(funk_transform(fodd, random_unit(rng), 64)) <= 1e-10 * sup


def test_funk_theta3_squared(rng):
    f = SphericalFunction.from_callable(2, lambda p: p[:, 2] ** 2)
    for _ in range(10):
        u = random_unit(rng)
        want = np.pi * (1 - u[2] ** 2)               # analytic average over the circle
        got = funk_transform(f, u, 64)
        assert abs(got - want) < 1e-12
        # cross-check against brute-force 1-d quadrature
        gamma = circle_param(u)
        brute, _ = quad(lambda t: gamma(t)[2] ** 2, 0, 2 * np.pi, epsabs=1e-12, limit=200)
        assert abs(got - brute) < 1e-10


def test_funk_m_validation(rng):
    with pytest.raises(InputError):
        funk_transform(const_fn(), random_unit(rng), 8)


# -- hemispherical transform --------------------------------------------------


def test_hemi_constant(rng):
    for _ in range(5):
        u = random_unit(rng)
        if abs(u[2]) > 0.9:
            continue
        assert abs(hemi_funk(const_fn(), u, "+", 64) - np.pi) < 1e-12
        assert abs(hemi_funk(const_fn(), u, "-", 64) - np.pi) < 1e-12


def test_hemi_theta3_example():
    f = SphericalFunction.from_callable(2, lambda p: p[:, 2])
    u = np.array([1.0, 0.0, 0.0])
    got_p = hemi_funk(f, u, "+", 4096)
    got_m = hemi_funk(f, u, "-", 4096)
    assert abs(got_p - 2.0) < 1e-6
    assert abs(got_m + 2.0) < 1e-6
    assert abs(got_p - quad_oracle_hemi(f, u, +1)) < 1e-6


def test_hemi_linear_combination(rng):
    f = SphericalFunction.from_callable(2, lambda p: 1.0 + 0.5 * p[:, 2])
    for _ in range(10):
        u = random_unit(rng)
        if abs(u[2]) > 0.95:
            continue
        a = np.sqrt(1 - u[2] ** 2)
        assert abs(hemi_funk(f, u, "+", 4096) - (np.pi + a)) < 1e-6
        assert abs(hemi_funk(f, u, "-", 4096) - (np.pi - a)) < 1e-6
        assert abs(hemi_funk(f, u, "+", 512) - quad_oracle_hemi(f, u, +1)) < 1e-4


def test_hemi_degenerate_frame():
    with pytest.raises(DegenerateFrameError, match="equatorial"):
        hemi_funk(const_fn(), np.array([0.0, 0.0, 1.0]), "+", 64)


# -- identities (module-scale; the acceptance suite runs the full sweep) ------


def test_partition_reflection_evenization(rng):
    f, _ = random_band_limited(rng, 8)
    fcheck = reflected(f)
    f1 = evenized(f)
    m = 256
    for _ in range(60):
        u = random_unit(rng)
        if abs(u[2]) > 1 - 1e-6:
            continue
        full = funk_transform(f, u, m)
        hp = hemi_funk(f, u, "+", m)
        hm = hemi_funk(f, u, "-", m)
        assert abs(hp + hm - full) < 1e-10                       # partition
        assert abs(hp + hm - funk_transform(f, u, 2 * m)) < 1e-10
        assert abs(hp - hemi_funk(fcheck, u, "-", m)) < 1e-12    # reflection
        assert abs(hm - hemi_funk(fcheck, u, "+", m)) < 1e-12
        assert abs(hp - 0.5 * funk_transform(f1, u, 2 * m)) < 1e-12  # evenization


# -- half-section volumes ------------------------------------------------------


def test_half_section_unit_ball(rng):
    body = Ball(3, 1.0)
    for _ in range(5):
        u = random_unit(rng)
        if abs(u[2]) > 0.9:
            continue
        fr = SectionFrame(3, 2, "full", "+", u=tuple(u))
        assert abs(half_section_volume(body, fr, 64) - np.pi / 2) < 1e-12


def segment_area_oracle(t, R):
    """Area of a half-disk cut: full disk minus the segment beyond the chord
    at distance t from the center."""
    return np.pi * R**2 - (R**2 * np.arccos(t / R) - t * np.sqrt(R**2 - t**2))


def test_half_section_segment_oracle(rng):
    # plane through the center, near-side half: frozen value 2.527408
    body = ShiftedBall(3, (0.0, 0.0, 0.5), 1.0)
    fr = SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))
    got = half_section_volume(body, fr, 8192)
    oracle = segment_area_oracle(0.5, 1.0)
    assert abs(oracle - 2.527408) < 5e-7
    assert abs(got - oracle) < 1e-6
    # Monte Carlo cross-check over the half-plane
    pts = rng.uniform(-1.6, 1.6, size=(200000, 2))
    inside = (pts[:, 0] ** 2 + (pts[:, 1] - 0.5) ** 2 <= 1.0) & (pts[:, 1] > 0)
    mc = inside.mean() * 3.2**2
    assert abs(mc - oracle) < 0.02


def test_half_section_ellipsoid(rng):
    a, b = 1.4, 0.7
    body = Ellipsoid(3, (1.1, a, b))
    with pytest.raises(DegenerateFrameError):
        SectionFrame(3, 2, "full", "+", u=(0.0, 0.0, 1.0))
    fr = SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))
    got = half_section_volume(body, fr, 4096)
    # oracle: polar-coordinate quadrature of the half ellipse area
    oracle, _ = quad(lambda t: 0.5 / ((np.cos(t) / a) ** 2 + (np.sin(t) / b) ** 2), 0, np.pi,
                     epsabs=1e-12, limit=200)
    assert abs(oracle - np.pi * a * b / 2) < 1e-10
    assert abs(got - oracle) < 1e-6


# -- reduced transform ----------------------------------------------------------


def test_reduced_constant(rng):
    f = const_fn(3)
    for _ in range(5):
        v = random_unit(rng, 2)
        w = random_unit(rng, 3)
        if abs(w[2]) > 0.9:
            continue
        assert abs(reduced_hemi_funk(f, v, w, "+", 64, n=4) - np.pi) < 1e-12


def test_reduced_theta4_example():
    # v = e2 makes the alignment rotation the identity; f = theta_4 over the
    # (e3, e4) half circle integrates to 2
    f = SphericalFunction.from_callable(3, lambda p: p[:, 3])
    got = reduced_hemi_funk(f, np.array([0.0, 1.0]), np.array([1.0, 0.0, 0.0]), "+", 4096, n=4)
    assert abs(got - 2.0) < 1e-6


def test_reduced_consistency_at_identity(rng):
    # v = e_{n-k}: the reduced integral equals the hemispherical integral of
    # the restriction of f to the last-coordinates sphere
    f, _ = random_band_limited(rng, 5)
    f4 = SphericalFunction.from_callable(3, lambda p: f.evaluate(p[:, 1:]))
    restricted = SphericalFunction.from_callable(2, lambda y: f.evaluate(y))
    v = np.array([0.0, 1.0])
    for _ in range(10):
        w = random_unit(rng, 3)
        if abs(w[2]) > 0.9:
            continue
        got = reduced_hemi_funk(f4, v, w, "+", 128, n=4)
        want = hemi_funk(restricted, w, "+", 128)
        assert abs(got - want) < 1e-12


# -- simulation ------------------------------------------------------------------


def test_simulate_unit_ball():
    data = simulate_dataset(Ball(3, 1.0), full_frames(3, 100), m=64)
    assert len(data) == 200
    vals = np.array([v for _, v in data.records])
    assert np.max(np.abs(vals - np.pi / 2)) < 1e-10


def test_simulate_partition(rng):
    body = ShiftedBall(3, (0.2, 0.0, 0.1), 1.0)
    frames = full_frames(3, 50)
    data = simulate_dataset(body, frames, m=256)
    us, vp, vm = data.paired_arrays()
    from halfsect import power_function

    rho2 = power_function(body, 2)
    for u, p, mn in zip(us[:20], vp[:20], vm[:20]):
        full = funk_transform(rho2, u, 512) / 2.0
        assert abs(p + mn - full) < 1e-10


def test_simulate_detects_asymmetry():
    body = ShiftedBall(3, (0.2, 0.0, 0.1), 1.0)
    data = simulate_dataset(body, full_frames(3, 200), m=256)
    _, vp, vm = data.paired_arrays()
    assert np.max(np.abs(vp - vm)) > 0.1
    assert np.all(np.isfinite(vp)) and np.all(np.isfinite(vm))


def test_simulate_deterministic():
    body = ShiftedBall(3, (0.1, 0.0, 0.05), 1.0)
    a = simulate_dataset(body, full_frames(3, 40), m=64)
    b = simulate_dataset(body, full_frames(3, 40), m=64)
    assert all(x == y for (_, x), (_, y) in zip(a.records, b.records))


def test_simulate_reports_offending_frame():
    frames = [SectionFrame(4, 2, "reduced", "+", v=(1.0, 0.0), w=(1.0, 0.0, 0.0)),
              SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))]
    with pytest.raises(InputError, match="frame 1"):
        simulate_dataset(HarmonicStub(), frames, m=64)


class HarmonicStub:
    dim = 4

    def radial_points(self, pts):
        return np.ones(len(pts))


# -- dataset validation -----------------------------------------------------------


def test_dataset_requires_pairing():
    fr = SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))
    with pytest.raises(InputError, match="unpaired"):
        HemiDataset(3, 2, "full", ((fr, 1.0),))


def test_dataset_rejects_nonfinite():
    fr = SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))
    with pytest.raises(InputError, match="non-finite"):
        HemiDataset(3, 2, "full", ((fr, np.nan), (fr.with_sign("-"), 1.0)))


def test_dataset_homogeneity():
    fr = SectionFrame(3, 2, "full", "+", u=(1.0, 0.0, 0.0))
    with pytest.raises(InputError):
        HemiDataset(4, 2, "full", ((fr, 1.0), (fr.with_sign("-"), 1.0)))


def test_fibonacci_deterministic():
    assert np.array_equal(fibonacci_directions(100), fibonacci_directions(100))
    assert np.allclose(np.linalg.norm(fibonacci_directions(50), axis=1), 1.0)
