import numpy as np
import pytest
from numpy.polynomial import chebyshev as cheb
from scipy.special import eval_legendre

from halfsect import (
    Convention,
    InputError,
    NumericalError,
    SphericalFunction,
    build_grid,
    dual_profile,
    funk_inverse_harmonic,
    funk_multiplier,
    funk_transform,
    mean_value_inverse,
    multiplier_probe,
    parse_convention,
    shifted_dual_transform,
)
from halfsect.harmonics import HarmonicSpectrum, num_coeffs, sph_harm_s2
from halfsect.inversion import default_s_grid

from conftest import random_band_limited, random_unit


# -- multipliers ---------------------------------------------------------------


def test_multiplier_values():
    assert abs(funk_multiplier(0) - 2 * np.pi) < 1e-15
    assert abs(funk_multiplier(2) + np.pi) < 1e-15
    assert abs(funk_multiplier(4) - 3 * np.pi / 4) < 1e-15
    with pytest.raises(InputError):
        funk_multiplier(3)


@pytest.mark.parametrize("l", [0, 2, 4, 6, 8])
def test_multiplier_quadrature_oracle(l, rng):
    u = random_unit(rng)
    f = SphericalFunction.from_callable(2, lambda p: sph_harm_s2(l, 0, p))
    ratio = funk_transform(f, u, 256) / sph_harm_s2(l, 0, u[None, :])[0]
    assert abs(ratio - funk_multiplier(l)) < 1e-8


# -- harmonic inversion -----------------------------------------------------------


def test_inverse_constant(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 2 * np.pi))
    inv = funk_inverse_harmonic(phi, 8)
    pts = random_unit(rng, 3, size=200)
    assert np.max(np.abs(inv.function.evaluate(pts) - 1.0)) < 1e-10
    assert inv.odd_energy_fraction < 1e-12


def test_inverse_single_harmonic(rng):
    phi = SphericalFunction.from_callable(2, lambda p: -np.pi * sph_harm_s2(2, 0, p))
    inv = funk_inverse_harmonic(phi, 8)
    pts = random_unit(rng, 3, size=200)
    assert np.max(np.abs(inv.function.evaluate(pts) - sph_harm_s2(2, 0, pts))) < 1e-10


def test_inverse_forward_roundtrip(rng):
    f, _ = random_band_limited(rng, 8, parity="even")
    grid = build_grid(2, 64)
    phi_vals = np.empty(len(grid))
    # forward quadrature is the oracle
    for i, u in enumerate(grid.nodes):
        phi_vals[i] = funk_transform(f, u, 64)
    inv = funk_inverse_harmonic(SphericalFunction.from_grid(grid, phi_vals), 8, grid)
    pts = random_unit(rng, 3, size=500)
    assert np.max(np.abs(inv.function.evaluate(pts) - f.evaluate(pts))) < 1e-6


def test_forward_of_inverse_roundtrip(rng):
    # the transform of the inversion reproduces even data
    fsrc, _ = random_band_limited(rng, 6, parity="even")
    grid = build_grid(2, 32)
    phi = SphericalFunction.from_callable(
        2, lambda pts: np.array([funk_transform(fsrc, u, 64) for u in np.atleast_2d(pts)])
    )
    inv = funk_inverse_harmonic(phi, 6, grid)
    for _ in range(10):
        u = random_unit(rng)
        assert abs(funk_transform(inv.function, u, 64) - phi.evaluate(u)) < 1e-6


def test_inverse_flags_odd_energy(rng):
    fodd, _ = random_band_limited(rng, 5, parity="odd")
    phi = SphericalFunction.from_callable(2, lambda p: 2 * np.pi + 6.0 * fodd.evaluate(p))
    inv = funk_inverse_harmonic(phi, 8)
    assert inv.odd_energy_fraction > 0.01
    assert inv.warnings


def test_inverse_requires_even_lmax():
    phi = SphericalFunction.from_callable(2, lambda p: np.ones(len(p)))
    with pytest.raises(InputError):
        funk_inverse_harmonic(phi, 7)


# -- shifted dual transform --------------------------------------------------------


def test_dual_constant(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 3.7))
    th = random_unit(rng)
    for r in (0.2, 0.5, 0.9):
        assert abs(shifted_dual_transform(phi, th, r) - 3.7) < 1e-12
        got = shifted_dual_transform(phi, th, r, convention="calibrated:2.0")
        assert abs(got - 7.4) < 1e-12


@pytest.mark.parametrize("l", [2, 4, 6])
def test_dual_funk_hecke(l, rng):
    lam = funk_multiplier(l)
    phi = SphericalFunction.from_callable(2, lambda p: lam * sph_harm_s2(l, 0, p))
    th = random_unit(rng)
    yl = sph_harm_s2(l, 0, th[None, :])[0]
    for r in (0.25, 0.6, 0.9):
        want = lam * eval_legendre(l, np.sqrt(1 - r * r)) * yl
        got = shifted_dual_transform(phi, th, r, m=128)
        assert abs(got - want) < 1e-10
        # brute-force orbit average with random samples (independent oracle)
        alpha = rng.uniform(0, 2 * np.pi, 10000)
        e = np.zeros(3)
        e[np.argmin(np.abs(th))] = 1.0
        p = e - (e @ th) * th
        p /= np.linalg.norm(p)
        q = np.cross(th, p)
        us = (np.sqrt(1 - r * r) * th[None, :]
              + r * (np.outer(np.cos(alpha), p) + np.outer(np.sin(alpha), q)))
        mc = float(np.mean(phi.evaluate(us)))
        assert abs(got - mc) < 5e-3 * max(abs(lam), 1.0)


def test_dual_limit_subspaces_through_theta(rng):
    # r -> 1: mean over sections whose subspace contains theta
    f, _ = random_band_limited(rng, 6)
    phi = SphericalFunction.from_callable(
        2, lambda pts: np.array([funk_transform(f, u, 64) for u in np.atleast_2d(pts)])
    )
    th = random_unit(rng)
    e = np.zeros(3)
    e[np.argmin(np.abs(th))] = 1.0
    p = e - (e @ th) * th
    p /= np.linalg.norm(p)
    q = np.cross(th, p)
    ang = 2 * np.pi * (np.arange(256) + 0.5) / 256
    ring = np.outer(np.cos(ang), p) + np.outer(np.sin(ang), q)       # normals orthogonal to theta
    want = float(np.mean(phi.evaluate(ring)))
    got = shifted_dual_transform(phi, th, 0.99995, m=256)
    assert abs(got - want) < 1e-3


def test_dual_limit_small_r(rng):
    # r -> 0: the orbit collapses onto the single subspace orthogonal to
    # theta (the farthest one), consistently with the Funk-Hecke profile
    f, _ = random_band_limited(rng, 6)
    phi = SphericalFunction.from_callable(
        2, lambda pts: np.array([funk_transform(f, u, 64) for u in np.atleast_2d(pts)])
    )
    th = random_unit(rng)
    want = phi.evaluate(th)           # the section normal to theta itself
    got = shifted_dual_transform(phi, th, 1e-4, m=128)
    assert abs(got - want) < 1e-3


def test_dual_rotation_invariance(rng):
    from scipy.spatial.transform import Rotation as R

    f, _ = random_band_limited(rng, 6)
    phi = SphericalFunction.from_callable(2, lambda p: f.evaluate(p))
    rot = R.random(random_state=11).as_matrix()
    if np.linalg.det(rot) < 0:
        rot = -rot
    phi_rot = SphericalFunction.from_callable(2, lambda p: phi.evaluate(p @ rot))
    th = random_unit(rng)
    for r in (0.3, 0.8):
        # phi_rot(u) = phi(R^-1 u), so the matching evaluation point is R theta
        a = shifted_dual_transform(phi, th, r, m=256)
        b = shifted_dual_transform(phi_rot, rot @ th, r, m=256)
        assert abs(a - b) < 1e-8


def test_dual_validation(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.ones(len(p)))
    th = random_unit(rng)
    with pytest.raises(InputError):
        shifted_dual_transform(phi, th, 1.5)
    with pytest.raises(InputError):
        shifted_dual_transform(phi, th, 0.5, m=8)
    with pytest.raises(InputError):
        parse_convention("nonsense")


def test_dual_profile_polynomial_in_t(rng):
    # band-limited data produce profiles polynomial in t = s^2
    f, _ = random_band_limited(rng, 8, parity="even")
    phi = SphericalFunction.from_callable(
        2, lambda pts: np.array([funk_transform(f, u, 64) for u in np.atleast_2d(pts)])
    )
    th = random_unit(rng)
    prof = dual_profile(phi, th, m=128)
    t = prof.r_nodes**2
    coeffs = np.polynomial.polynomial.polyfit(t, prof.values, 4)
    resid = np.abs(np.polynomial.polynomial.polyval(t, coeffs) - prof.values)
    assert np.max(resid) < 1e-8
    assert prof.convention == "probability"


# -- mean-value inversion -------------------------------------------------------


def test_mean_value_constant_probability(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 2 * np.pi))
    th = random_unit(rng)
    got = mean_value_inverse(phi, th, k=2, convention="probability")
    # documents the probability-convention halving (exact value would be 1)
    assert abs(got - 0.5) < 1e-3


def test_mean_value_calibration_definition(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 2 * np.pi))
    th = random_unit(rng)
    base = mean_value_inverse(phi, th, k=2, convention="probability")
    kappa = 1.0 / base
    got = mean_value_inverse(phi, th, k=2, convention=Convention("calibrated", kappa))
    assert abs(got - 1.0) < 1e-6


def test_mean_value_linearity(rng):
    f1, _ = random_band_limited(rng, 4, parity="even")
    f2, _ = random_band_limited(rng, 6, parity="even")
    phi1 = SphericalFunction.from_callable(2, lambda p: f1.evaluate(p))
    phi2 = SphericalFunction.from_callable(2, lambda p: f2.evaluate(p))
    a, b = 1.7, -0.4
    comb = SphericalFunction.from_callable(2, lambda p: a * f1.evaluate(p) + b * f2.evaluate(p))
    th = random_unit(rng)
    lhs = mean_value_inverse(comb, th)
    rhs = a * mean_value_inverse(phi1, th) + b * mean_value_inverse(phi2, th)
    assert abs(lhs - rhs) < 1e-8


def test_mean_value_general_k_path_agrees(rng):
    # Abel-integral route and derivative-only route coincide for k = 2
    l = 2
    lam = funk_multiplier(l)
    phi = SphericalFunction.from_callable(2, lambda p: lam * sph_harm_s2(l, 0, p))
    th = random_unit(rng)
    a = mean_value_inverse(phi, th, k=2, variant="even_derivative")
    b = mean_value_inverse(phi, th, k=2, variant="abel")
    assert abs(a - b) < 1e-4


def test_mean_value_k4_paths_match_symbolic(rng):
    # constant data, k=4: the bracket is prefactor * Beta(5/2,2) * t^(7/2),
    # whose fourth t-derivative at 1 gives 3C/(8 pi^2); the derivative-only
    # path gives the same value, exercising the Jacobi-weight branch
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 2 * np.pi))
    th = random_unit(rng)
    want = 3.0 / (4.0 * np.pi)
    a = mean_value_inverse(phi, th, k=4, variant="even_derivative", fit_degree=10)
    b = mean_value_inverse(phi, th, k=4, variant="abel", fit_degree=10)
    assert abs(a - want) < 1e-3
    assert abs(b - want) < 1e-3
    # the plain-derivative alternative annihilates constants here as well
    c = mean_value_inverse(phi, th, k=4, variant="plain_derivative", fit_degree=10)
    assert abs(c) < 1e-3


def test_convention_validation():
    with pytest.raises(InputError):
        Convention("probability", kappa=2.0)
    assert parse_convention("calibrated(1.5)").kappa == 1.5
    assert parse_convention("calibrated:1.5").tag() == "calibrated(1.5)"


def test_plain_derivative_variant_not_equivalent(rng):
    # as-written alternative: plain d/ds with 2^-k constants sends constants
    # to zero under the probability convention rather than to 1/2
    phi = SphericalFunction.from_callable(2, lambda p: np.full(len(p), 2 * np.pi))
    th = random_unit(rng)
    got = mean_value_inverse(phi, th, k=2, variant="plain_derivative")
    assert abs(got) < 1e-3
    assert abs(got - 0.5) > 0.4


def test_mean_value_fit_guard(rng):
    # a profile far from polynomial in t trips the residual check
    phi = SphericalFunction.from_callable(2, lambda p: np.exp(5 * p[:, 2]))
    th = np.array([0.0, 0.0, 1.0])
    with pytest.raises(NumericalError, match="polynomial-resolvable"):
        mean_value_inverse(phi, th, k=2, fit_degree=2, fit_tol=1e-10)


def test_s_grid_validation(rng):
    phi = SphericalFunction.from_callable(2, lambda p: np.ones(len(p)))
    with pytest.raises(InputError, match="0.95"):
        mean_value_inverse(phi, random_unit(rng), s_grid=np.array([0.5, 0.6, 0.7]))
    s = default_s_grid()
    assert s[-1] >= 0.95 and np.all(np.diff(s) > 0)


# -- probes ------------------------------------------------------------------------


def test_probe_degree0():
    res = multiplier_probe(0, "probability")
    assert abs(res.mu - 0.5) < 1e-3
    assert res.cross_talk <= 1e-3


def test_probe_degree2():
    res = multiplier_probe(2, "probability")
    assert abs(res.mu - 0.875) < 1e-3
    assert res.cross_talk <= 1e-3


@pytest.mark.parametrize("l", [4, 6, 8])
def test_probe_diagonality(l):
    res = multiplier_probe(l, "probability")
    assert res.cross_talk <= 1e-3
    assert not res.flagged


def test_probe_rejects_odd():
    with pytest.raises(InputError):
        multiplier_probe(3, "probability")
