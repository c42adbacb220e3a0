"""Two-microphone spatial processing: delay-and-sum projection, spatial
images, the speech-presence mask, online spatial covariance (SCM) tracking
and closed-form steering-vector estimation.

Shapes: steering vectors and stereo spectra are ``complex[2, K]``; an SCM is
``complex[K, 2, 2]``; masks are ``float[K]``.
"""

from __future__ import annotations

import numpy as np

from ._kernels import backend as _default_backend
from .errors import ConfigurationError
from .stft import MonoSpectrum, StereoSpectrum

SCM_INIT = 1e-6  # R0 = SCM_INIT * I
COLD_START_FACTOR = 10.0  # fixed pair is used until trace(R) > COLD_START_FACTOR * SCM_INIT
HERMITIAN_TOL = 1e-9


def _data(x):
    return x.data if isinstance(x, StereoSpectrum) else np.asarray(x, dtype=np.complex128)


def _pair(a, n_bins=None):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != 2:
        raise ConfigurationError(f"steering vectors must have shape (2, K), got {a.shape}")
    if n_bins is not None and a.shape[1] != n_bins:
        raise ConfigurationError(f"steering vector has {a.shape[1]} bins, signal has {n_bins}")
    return a


def fixed_steering_nsv(n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """The non-adaptive pair ``[1, 1]/sqrt2`` and ``[1, -1]/sqrt2`` for every bin."""
    s = 1.0 / np.sqrt(2.0)
    a1 = np.full((2, n_bins), s, dtype=np.complex128)
    a2 = a1.copy()
    a2[1] = -s
    return a1, a2


def dsbf(x, a, backend=None) -> MonoSpectrum:
    """Delay-and-sum output ``d = a^H x`` per bin."""
    kb = backend or _default_backend
    xd = np.ascontiguousarray(_data(x))
    a = _pair(a, xd.shape[1])
    return MonoSpectrum(kb.dsbf(xd, a), getattr(x, "frame_index", 0))


def spatial_image(d, a, backend=None) -> StereoSpectrum:
    """Stereo image ``y_m = d * a_m`` of a beamformed signal."""
    kb = backend or _default_backend
    bins = np.ascontiguousarray(getattr(d, "bins", d), dtype=np.complex128)
    a = _pair(a, bins.shape[0])
    return StereoSpectrum(kb.spatial_image(bins, a), getattr(d, "frame_index", 0))


def compute_mask(c_prev, x_prev, backend=None) -> np.ndarray:
    """``min(||c|| / ||x||, 1)`` per bin, zero where ``x`` vanishes."""
    kb = backend or _default_backend
    c = np.ascontiguousarray(_data(c_prev))
    x = np.ascontiguousarray(_data(x_prev))
    if c.shape != x.shape:
        raise ConfigurationError("mask inputs differ in shape")
    return kb.speech_mask(c, x)


def init_scm(n_bins: int, scale: float = SCM_INIT) -> np.ndarray:
    R = np.zeros((n_bins, 2, 2), dtype=np.complex128)
    R[:, 0, 0] = scale
    R[:, 1, 1] = scale
    return R


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"forgetting factor must lie in (0, 1), got {alpha}")
    return float(alpha)


def update_scm(R, x, mask, alpha: float, backend=None) -> np.ndarray:
    """Mask-gated recursive SCM update; returns a new array."""
    kb = backend or _default_backend
    alpha = check_alpha(alpha)
    out = np.array(R, dtype=np.complex128, order="C")
    xd = np.ascontiguousarray(_data(x))
    m = np.ascontiguousarray(mask, dtype=np.float64)
    if out.shape != (xd.shape[1], 2, 2) or m.shape != (xd.shape[1],):
        raise ConfigurationError("SCM, signal and mask sizes disagree")
    kb.scm_update(out, xd, m, alpha)
    return out


def check_hermitian(R, tol: float = HERMITIAN_TOL) -> None:
    R = np.asarray(R)
    scale = np.maximum(np.abs(R).max(axis=(-2, -1)), 1.0)
    dev = np.abs(R - np.conj(np.swapaxes(R, -1, -2))).max(axis=(-2, -1))
    if np.any(dev > tol * scale):
        raise ConfigurationError("spatial covariance is not Hermitian")


def principal_eigvec(R, prev=None, backend=None) -> np.ndarray:
    """Unit-norm principal eigenvector per bin (closed form).

    Where the two eigenvalues are tied (gap <= 1e-12 * trace) the
    corresponding column of ``prev`` is returned; ``prev`` defaults to the
    fixed ``[1, 1]/sqrt2`` vector.
    """
    kb = backend or _default_backend
    R = np.ascontiguousarray(R, dtype=np.complex128)
    if R.ndim != 3 or R.shape[1:] != (2, 2):
        raise ConfigurationError(f"SCM must have shape (K, 2, 2), got {R.shape}")
    check_hermitian(R)
    if prev is None:
        prev = fixed_steering_nsv(R.shape[0])[0]
    prev = _pair(prev, R.shape[0])
    v, _ = kb.principal_eigvec(R, prev)
    return v


def orthogonal_complement(a, backend=None) -> np.ndarray:
    """``[-conj(a2), conj(a1)]`` with the phase convention applied."""
    kb = backend or _default_backend
    return kb.orthogonal_complement(_pair(a))


def phase_normalize(v, backend=None) -> np.ndarray:
    kb = backend or _default_backend
    return kb.phase_normalize(_pair(v))


def hermitian_angle(a, b) -> np.ndarray:
    """Angle in degrees between complex vectors, ignoring global phase, per bin."""
    a = np.asarray(a)
    b = np.asarray(b)
    cos = np.abs(np.sum(np.conj(a) * b, axis=0))
    # |a|^2 |b|^2 - |a^H b|^2 = |a0 b1 - a1 b0|^2 for 2-vectors; atan2 keeps
    # small angles accurate where arccos would not
    sin = np.abs(a[0] * b[1] - a[1] * b[0])
    return np.degrees(np.arctan2(sin, cos))


class SteeringTracker:
    """Per-stream SCM and steering-vector state for the adaptive modes."""

    def __init__(self, n_bins: int, alpha: float = 0.99, backend=None):
        self.alpha = check_alpha(alpha)
        self.backend = backend or _default_backend
        self.R = init_scm(n_bins)
        self.a1, self.a2 = fixed_steering_nsv(n_bins)
        self.cold_trace = COLD_START_FACTOR * SCM_INIT

    def update(self, x: np.ndarray, c: np.ndarray) -> np.ndarray:
        """Feed one completed frame (input ``x``, output ``c``); returns the mask."""
        return self.backend.steering_update(
            self.R, np.ascontiguousarray(x), np.ascontiguousarray(c),
            self.alpha, self.a1, self.a2, self.cold_trace,
        )
