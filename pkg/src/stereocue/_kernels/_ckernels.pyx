# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-frame kernels.  Same contract as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()

NAME = "compiled"

cdef double PHASE_EPS = 1e-9
cdef double TIE_REL = 1e-12
cdef double MASK_EPS = 1e-12
cdef double INV_SQRT2 = 0.7071067811865476


cdef inline double abs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double cabs(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef inline double complex conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline void normalize_pair(double complex *v0, double complex *v1) noexcept nogil:
    cdef double n = sqrt(abs2(v0[0]) + abs2(v1[0]))
    cdef double m
    cdef double complex rot
    if n > 0:
        v0[0] = v0[0] / n
        v1[0] = v1[0] / n
    m = cabs(v0[0])
    if m >= PHASE_EPS:
        rot = conj(v0[0]) / m
        v1[0] = v1[0] * rot
        v0[0] = m
    else:
        m = cabs(v1[0])
        if m > 0:
            rot = conj(v1[0]) / m
            v0[0] = v0[0] * rot
        v1[0] = m


cdef inline bint eigvec_bin(double a, double c, double complex b,
                            double complex *v0, double complex *v1) noexcept nogil:
    """Principal eigenvector of [[a, b], [conj(b), c]]; returns True on a tie."""
    cdef double z = 0.5 * (a - c)
    cdef double r = sqrt(z * z + abs2(b))
    if 2.0 * r <= TIE_REL * (a + c):
        return True
    if z >= 0:
        v0[0] = r + z
        v1[0] = conj(b)
    else:
        v0[0] = b
        v1[0] = r - z
    normalize_pair(v0, v1)
    return False


def dsbf(const double complex[:, ::1] x, const double complex[:, ::1] a):
    cdef Py_ssize_t K = x.shape[1], k
    out = np.empty(K, dtype=np.complex128)
    cdef double complex[::1] d = out
    with nogil:
        for k in range(K):
            d[k] = conj(a[0, k]) * x[0, k] + conj(a[1, k]) * x[1, k]
    return out


def spatial_image(const double complex[::1] d, const double complex[:, ::1] a):
    cdef Py_ssize_t K = d.shape[0], k
    out = np.empty((2, K), dtype=np.complex128)
    cdef double complex[:, ::1] y = out
    with nogil:
        for k in range(K):
            y[0, k] = a[0, k] * d[k]
            y[1, k] = a[1, k] * d[k]
    return out


def project(const double complex[:, ::1] x, const double complex[:, ::1] a):
    cdef Py_ssize_t K = x.shape[1], k
    d_arr = np.empty(K, dtype=np.complex128)
    y_arr = np.empty((2, K), dtype=np.complex128)
    cdef double complex[::1] d = d_arr
    cdef double complex[:, ::1] y = y_arr
    cdef double complex dk
    with nogil:
        for k in range(K):
            dk = conj(a[0, k]) * x[0, k] + conj(a[1, k]) * x[1, k]
            d[k] = dk
            y[0, k] = a[0, k] * dk
            y[1, k] = a[1, k] * dk
    return d_arr, y_arr


cdef void _mask(const double complex[:, ::1] c, const double complex[:, ::1] x,
                double[::1] m) noexcept nogil:
    cdef Py_ssize_t k
    cdef double nc, nx
    for k in range(x.shape[1]):
        nx = sqrt(abs2(x[0, k]) + abs2(x[1, k]))
        if nx < MASK_EPS:
            m[k] = 0.0
        else:
            nc = sqrt(abs2(c[0, k]) + abs2(c[1, k]))
            m[k] = nc / nx if nc < nx else 1.0


def speech_mask(const double complex[:, ::1] c, const double complex[:, ::1] x):
    out = np.empty(x.shape[1], dtype=np.float64)
    cdef double[::1] m = out
    with nogil:
        _mask(c, x, m)
    return out


cdef void _scm(double complex[:, :, ::1] R, const double complex[:, ::1] x,
               const double[::1] mask, double alpha) noexcept nogil:
    cdef Py_ssize_t k
    cdef double g, h
    cdef double complex x0, x1, r01
    for k in range(x.shape[1]):
        g = 1.0 - mask[k] * (1.0 - alpha)
        h = 1.0 - g
        x0 = x[0, k]
        x1 = x[1, k]
        R[k, 0, 0] = g * R[k, 0, 0].real + h * abs2(x0)
        R[k, 1, 1] = g * R[k, 1, 1].real + h * abs2(x1)
        r01 = g * R[k, 0, 1] + h * x0 * conj(x1)
        R[k, 0, 1] = r01
        R[k, 1, 0] = conj(r01)


def scm_update(double complex[:, :, ::1] R, const double complex[:, ::1] x,
               const double[::1] mask, double alpha):
    with nogil:
        _scm(R, x, mask, alpha)


def phase_normalize(v):
    arr = np.array(v, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] w = arr
    cdef Py_ssize_t k
    with nogil:
        for k in range(w.shape[1]):
            normalize_pair(&w[0, k], &w[1, k])
    return arr


def principal_eigvec(const double complex[:, :, ::1] R, const double complex[:, ::1] prev):
    cdef Py_ssize_t K = R.shape[0], k
    out = np.empty((2, K), dtype=np.complex128)
    tie_arr = np.zeros(K, dtype=np.bool_)
    cdef double complex[:, ::1] v = out
    cdef cnp.npy_bool[::1] tie = tie_arr
    with nogil:
        for k in range(K):
            if eigvec_bin(R[k, 0, 0].real, R[k, 1, 1].real, R[k, 0, 1], &v[0, k], &v[1, k]):
                tie[k] = 1
                v[0, k] = prev[0, k]
                v[1, k] = prev[1, k]
    return out, tie_arr


def orthogonal_complement(const double complex[:, ::1] a):
    cdef Py_ssize_t K = a.shape[1], k
    out = np.empty((2, K), dtype=np.complex128)
    cdef double complex[:, ::1] b = out
    with nogil:
        for k in range(K):
            b[0, k] = -conj(a[1, k])
            b[1, k] = conj(a[0, k])
            normalize_pair(&b[0, k], &b[1, k])
    return out


def steering_update(double complex[:, :, ::1] R, const double complex[:, ::1] x,
                    const double complex[:, ::1] c, double alpha,
                    double complex[:, ::1] a1, double complex[:, ::1] a2,
                    double cold_trace):
    cdef Py_ssize_t K = x.shape[1], k
    mask_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] m = mask_arr
    cdef double complex v0, v1
    with nogil:
        _mask(c, x, m)
        _scm(R, x, m, alpha)
        for k in range(K):
            if R[k, 0, 0].real + R[k, 1, 1].real <= cold_trace:
                v0 = INV_SQRT2
                v1 = INV_SQRT2
            elif eigvec_bin(R[k, 0, 0].real, R[k, 1, 1].real, R[k, 0, 1], &v0, &v1):
                v0 = a1[0, k]
                v1 = a1[1, k]
            a1[0, k] = v0
            a1[1, k] = v1
            a2[0, k] = -conj(v1)
            a2[1, k] = conj(v0)
            normalize_pair(&a2[0, k], &a2[1, k])
    return mask_arr


def band_energies(const double complex[::1] spec, const cnp.intp_t[::1] lower,
                  const double[::1] weight, Py_ssize_t n_bands):
    out = np.zeros(n_bands + 1, dtype=np.float64)
    cdef double[::1] e = out
    cdef Py_ssize_t k, b
    cdef double p
    with nogil:
        for k in range(spec.shape[0]):
            p = abs2(spec[k])
            b = lower[k]
            e[b] += weight[k] * p
            e[b + 1] += (1.0 - weight[k]) * p
    return out[:n_bands]


def band_to_bin(const double[::1] g, const cnp.intp_t[::1] lower, const double[::1] weight):
    cdef Py_ssize_t K = lower.shape[0], k, b, B = g.shape[0]
    out = np.empty(K, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(K):
            b = lower[k]
            if b + 1 < B:
                o[k] = weight[k] * g[b] + (1.0 - weight[k]) * g[b + 1]
            else:
                o[k] = weight[k] * g[b]
    return out
