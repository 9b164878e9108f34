import numpy as np
import pytest

from halfsect import InputError, SphericalFunction, analyze, build_grid, synthesize
from halfsect.harmonics import (
    HarmonicSpectrum,
    analyze_values,
    flat_index,
    num_coeffs,
    sh_matrix,
    sph_harm,
    sph_harm_s2,
    sph_harm_s3,
    synthesize_at,
    synthesize_on_grid,
)

from conftest import random_band_limited, random_unit


def test_orthonormality_s2():
    g = build_grid(2, 32)
    y = sh_matrix(g.nodes, 8)
    gram = y.T @ (g.weights[:, None] * y)
    assert np.max(np.abs(gram - np.eye(num_coeffs(8)))) < 1e-10


def test_constant_spectrum():
    g = build_grid(2, 16)
    spec = analyze(SphericalFunction.from_callable(2, lambda p: np.ones(len(p))), g, 8)
    assert abs(spec.coefficient(0, 0) - np.sqrt(4 * np.pi)) < 1e-12
    rest = spec.coeffs.copy()
    rest[0] = 0.0
    assert np.max(np.abs(rest)) < 1e-10


@pytest.mark.parametrize("m", [-2, 0, 1])
def test_single_harmonic_unit_coefficient(m):
    g = build_grid(2, 16)
    spec = analyze(SphericalFunction.from_callable(2, lambda p: sph_harm_s2(2, m, p)), g, 6)
    assert abs(spec.coefficient(2, m) - 1.0) < 1e-12
    others = spec.coeffs.copy()
    others[flat_index(2, m)] = 0.0
    assert np.max(np.abs(others)) < 1e-12


def test_analyze_synthesize_roundtrip(rng):
    lmax = 16
    g = build_grid(2, 2 * lmax)
    coeffs = rng.normal(size=num_coeffs(lmax))
    f = synthesize(HarmonicSpectrum(2, lmax, coeffs))
    back = analyze(f, g, lmax)
    assert np.max(np.abs(back.coeffs - coeffs)) < 1e-8


def test_grid_synthesis_matches_pointwise(rng):
    lmax = 10
    g = build_grid(2, 24)
    coeffs = rng.normal(size=num_coeffs(lmax))
    spec = HarmonicSpectrum(2, lmax, coeffs)
    assert np.max(np.abs(synthesize_on_grid(spec, g) - synthesize_at(spec, g.nodes))) < 1e-11


def test_resolution_too_low():
    g = build_grid(2, 8)
    with pytest.raises(InputError, match="too low"):
        analyze_values(np.ones(len(g)), g, 8)


def test_orthonormality_s3():
    g = build_grid(3, 16)
    idx = [(0, 0), (1, 0), (1, 2), (2, 0), (2, 3), (2, 8), (3, 1), (3, 5)]
    funcs = [sph_harm_s3(l, mi, g.nodes) for l, mi in idx]
    for i, fi in enumerate(funcs):
        for j, fj in enumerate(funcs):
            val = float(np.sum(g.weights * fi * fj))
            assert abs(val - (1.0 if i == j else 0.0)) < 1e-9, (idx[i], idx[j])


def test_s3_degree_one_is_coordinate():
    # the zonal degree-1 harmonic is sqrt(2)/pi times the polar coordinate
    pts = random_unit(np.random.default_rng(3), 4, size=64)
    got = sph_harm_s3(1, 0, pts)
    assert np.max(np.abs(got - np.sqrt(2.0) / np.pi * pts[:, 3])) < 1e-12


def test_orthonormality_s1():
    g = build_grid(1, 64)
    fns = [sph_harm(1, 0, 0, g.nodes), sph_harm(1, 1, 0, g.nodes), sph_harm(1, 1, 1, g.nodes),
           sph_harm(1, 3, 0, g.nodes)]
    for i, fi in enumerate(fns):
        for j, fj in enumerate(fns):
            val = float(np.sum(g.weights * fi * fj))
            assert abs(val - (1.0 if i == j else 0.0)) < 1e-12


def test_band_limited_quadrature_exactness(rng):
    # grid quadrature integrates products of harmonics within the band exactly
    f, spec = random_band_limited(rng, 8)
    g = build_grid(2, 32)
    total = float(np.sum(g.weights * f.evaluate(g.nodes) ** 2))
    assert abs(total - float(np.sum(spec.coeffs**2))) < 1e-10
