import numpy as np
import pytest

from halfsect import kernels
from halfsect.harmonics import HarmonicSpectrum, degrees
from halfsect.inversion import synthesize


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile numba kernels once so timed tests measure algorithm time only
    kernels.warm_up()


@pytest.fixture
def rng():
    return np.random.default_rng(20240416)


def random_unit(rng, n=3, size=None):
    v = rng.normal(size=(size or 1, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[0] if size is None else v


def random_band_limited(rng, lmax, parity=None, scale=0.3):
    """Random band-limited function on S^2; parity 'even'/'odd' restricts degrees."""
    coeffs = rng.normal(size=(lmax + 1) ** 2) * scale
    degs = degrees(lmax)
    if parity == "even":
        coeffs[degs % 2 == 1] = 0.0
    elif parity == "odd":
        coeffs[degs % 2 == 0] = 0.0
    spec = HarmonicSpectrum(2, lmax, coeffs)
    return synthesize(spec), spec
