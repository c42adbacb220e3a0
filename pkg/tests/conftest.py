import numpy as np
import pytest

from stereocue._kernels import available, get_backend


@pytest.fixture(params=available())
def kb(request):
    """Every importable kernel backend."""
    return get_backend(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unitary_pair(rng, n_bins):
    """Random orthonormal steering pair per bin, via QR of a complex Gaussian."""
    a1 = np.empty((2, n_bins), complex)
    a2 = np.empty((2, n_bins), complex)
    for k in range(n_bins):
        q, _ = np.linalg.qr(crandn(rng, 2, 2))
        a1[:, k], a2[:, k] = q[:, 0], q[:, 1]
    return a1, a2


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
