"""Vectorised NumPy implementation of the per-frame kernels.

Array conventions (shared with ``_ckernels.pyx``):

* stereo spectra and steering vectors: ``complex128[2, K]``
* spatial covariance: ``complex128[K, 2, 2]``
* masks, bin gains: ``float64[K]``
"""

import numpy as np

NAME = "python"

PHASE_EPS = 1e-9
TIE_REL = 1e-12
MASK_EPS = 1e-12
INV_SQRT2 = 1.0 / np.sqrt(2.0)


def dsbf(x, a):
    return np.conj(a[0]) * x[0] + np.conj(a[1]) * x[1]


def spatial_image(d, a):
    return a * d


def speech_mask(c, x):
    nc = np.sqrt(np.abs(c[0]) ** 2 + np.abs(c[1]) ** 2)
    nx = np.sqrt(np.abs(x[0]) ** 2 + np.abs(x[1]) ** 2)
    out = np.zeros_like(nx)
    ok = nx >= MASK_EPS
    out[ok] = np.minimum(nc[ok] / nx[ok], 1.0)
    return out


def scm_update(R, x, mask, alpha):
    """In-place ``R <- g R + (1 - g) x x^H`` with ``g = 1 - mask (1 - alpha)``."""
    g = 1.0 - mask * (1.0 - alpha)
    h = 1.0 - g
    x0, x1 = x[0], x[1]
    r00 = g * R[:, 0, 0].real + h * (x0.real**2 + x0.imag**2)
    r11 = g * R[:, 1, 1].real + h * (x1.real**2 + x1.imag**2)
    r01 = g * R[:, 0, 1] + h * x0 * np.conj(x1)
    R[:, 0, 0] = r00
    R[:, 1, 1] = r11
    R[:, 0, 1] = r01
    R[:, 1, 0] = np.conj(r01)


def phase_normalize(v):
    """Scale each column to unit norm with the first component real and
    non-negative (second component when the first vanishes)."""
    v = np.array(v, dtype=np.complex128)
    n = np.sqrt(np.abs(v[0]) ** 2 + np.abs(v[1]) ** 2)
    n = np.where(n > 0, n, 1.0)
    v = v / n
    m0 = np.abs(v[0])
    use0 = m0 >= PHASE_EPS
    m1 = np.abs(v[1])
    ref = np.where(use0, v[0], v[1])
    mref = np.where(use0, m0, m1)
    rot = np.where(mref > 0, np.conj(ref) / np.where(mref > 0, mref, 1.0), 1.0)
    v = v * rot
    v[0] = np.where(use0, m0, v[0])
    v[1] = np.where(use0, v[1], m1)
    return v


def principal_eigvec(R, prev):
    """Closed-form principal eigenvector of each 2x2 Hermitian block.

    Bins whose eigenvalue gap is at most ``1e-12 * trace`` keep ``prev``.
    Returns ``(vectors, tie)``.
    """
    a = R[:, 0, 0].real
    c = R[:, 1, 1].real
    b = R[:, 0, 1]
    z = 0.5 * (a - c)
    r = np.sqrt(z * z + b.real**2 + b.imag**2)
    tie = 2.0 * r <= TIE_REL * (a + c)
    # pick the better conditioned of the two eigenvector formulas
    upper = z >= 0
    v0 = np.where(upper, r + z, b)
    v1 = np.where(upper, np.conj(b), r - z)
    v = phase_normalize(np.stack([v0, v1]))
    v[:, tie] = prev[:, tie]
    return v, tie


def orthogonal_complement(a):
    return phase_normalize(np.stack([-np.conj(a[1]), np.conj(a[0])]))


def steering_update(R, x, c, alpha, a1, a2, cold_trace):
    """Mask, SCM update and steering re-estimation for one frame (in place).

    Bins whose SCM trace is still at most ``cold_trace`` use the fixed pair
    ``[1, 1]/sqrt2, [1, -1]/sqrt2``.  Returns the mask.
    """
    mask = speech_mask(c, x)
    scm_update(R, x, mask, alpha)
    v, _ = principal_eigvec(R, a1)
    cold = (R[:, 0, 0].real + R[:, 1, 1].real) <= cold_trace
    v[0, cold] = INV_SQRT2
    v[1, cold] = INV_SQRT2
    a1[...] = v
    a2[...] = orthogonal_complement(v)
    return mask


def project(x, a):
    """DSBF output and its spatial image in one pass."""
    d = dsbf(x, a)
    return d, a * d


def band_energies(spec, lower, weight, n_bands):
    p = spec.real**2 + spec.imag**2
    e = np.bincount(lower, weights=weight * p, minlength=n_bands + 1)
    e += np.bincount(lower + 1, weights=(1.0 - weight) * p, minlength=n_bands + 1)
    return e[:n_bands]


def band_to_bin(g, lower, weight):
    gp = np.append(g, 0.0)
    return weight * gp[lower] + (1.0 - weight) * gp[lower + 1]
