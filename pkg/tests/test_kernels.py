"""Compiled and NumPy kernels must agree."""
import numpy as np
import pytest

from stereocue._kernels import _pykernels, available, get_backend
from stereocue.erb import design_erb_filterbank

from conftest import crandn

pytestmark = pytest.mark.skipif("compiled" not in available(), reason="extension not built")

K = 161


@pytest.fixture
def ck():
    return get_backend("compiled")


def random_scm(rng, n=K):
    v = crandn(rng, n, 2, 3)
    return np.ascontiguousarray(v @ np.conj(np.swapaxes(v, 1, 2)))


def test_backend_names():
    assert get_backend("python").NAME == "python"
    assert get_backend("compiled").NAME == "compiled"
    with pytest.raises(ValueError):
        get_backend("fortran")


def test_projection(ck, rng):
    x, a = crandn(rng, 2, K), crandn(rng, 2, K)
    for name in ("dsbf",):
        assert np.allclose(getattr(ck, name)(x, a), getattr(_pykernels, name)(x, a), atol=1e-13)
    d = crandn(rng, K)
    assert np.allclose(ck.spatial_image(d, a), _pykernels.spatial_image(d, a), atol=1e-13)
    for u, v in zip(ck.project(x, a), _pykernels.project(x, a)):
        assert np.allclose(u, v, atol=1e-13)


def test_mask(ck, rng):
    x, c = crandn(rng, 2, K), crandn(rng, 2, K)
    x[:, :5] = 0
    assert np.allclose(ck.speech_mask(c, x), _pykernels.speech_mask(c, x), atol=1e-14)


def test_scm_update(ck, rng):
    R1 = random_scm(rng)
    R2 = R1.copy()
    x, m = crandn(rng, 2, K), rng.uniform(0, 1, K)
    ck.scm_update(R1, x, m, 0.97)
    _pykernels.scm_update(R2, x, m, 0.97)
    assert np.allclose(R1, R2, atol=1e-13)


def test_eigvec_and_ties(ck, rng):
    R = random_scm(rng)
    R[:10] = np.eye(2) * 3.0
    prev = crandn(rng, 2, K)
    v1, t1 = ck.principal_eigvec(R, prev)
    v2, t2 = _pykernels.principal_eigvec(R, prev)
    assert np.array_equal(t1, t2) and t1[:10].all() and not t1[10:].any()
    assert np.allclose(v1, v2, atol=1e-12)


def test_normalize_and_complement(ck, rng):
    v = crandn(rng, 2, K)
    v[0, :4] = 0
    assert np.allclose(ck.phase_normalize(v), _pykernels.phase_normalize(v), atol=1e-13)
    a = _pykernels.phase_normalize(v)
    assert np.allclose(ck.orthogonal_complement(a), _pykernels.orthogonal_complement(a), atol=1e-13)


def test_steering_update(ck, rng):
    R1 = random_scm(rng) * 1e-3
    R1[:8] = np.eye(2) * 1e-6  # cold bins
    R2 = R1.copy()
    a1c, a2c = crandn(rng, 2, K), crandn(rng, 2, K)
    a1p, a2p = a1c.copy(), a2c.copy()
    x, c = crandn(rng, 2, K), crandn(rng, 2, K) * 0.5
    x[:, :8] = 0
    m1 = ck.steering_update(R1, x, c, 0.99, a1c, a2c, 1e-5)
    m2 = _pykernels.steering_update(R2, x, c, 0.99, a1p, a2p, 1e-5)
    assert np.allclose(m1, m2) and np.allclose(R1, R2, atol=1e-15)
    assert np.allclose(a1c, a1p, atol=1e-12) and np.allclose(a2c, a2p, atol=1e-12)


def test_bands(ck, rng):
    bank = design_erb_filterbank()
    s = crandn(rng, K)
    args = (bank.lower_band, bank.lower_weight)
    assert np.allclose(ck.band_energies(s, *args, 32), _pykernels.band_energies(s, *args, 32), rtol=1e-13)
    g = rng.uniform(0, 1, 32)
    assert np.allclose(ck.band_to_bin(g, *args), _pykernels.band_to_bin(g, *args), atol=1e-15)
