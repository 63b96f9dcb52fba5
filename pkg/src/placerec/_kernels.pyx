# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: dense descriptor accumulation and HMM recursions.

Mirrors the contracts of ``_kernels_py``; see that module for docs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

BACKEND = "compiled"


def accumulate_descriptors(
    double[:, ::1] mag,
    cnp.int64_t[:, ::1] ori_bin,
    int patch,
    int stride,
    int n_cells=4,
    int n_bins=8,
):
    cdef Py_ssize_t h = mag.shape[0]
    cdef Py_ssize_t w = mag.shape[1]
    cdef int cell = patch // n_cells
    cdef Py_ssize_t ny = (h - patch) // stride + 1
    cdef Py_ssize_t nx = (w - patch) // stride + 1
    cdef Py_ssize_t dim = n_cells * n_cells * n_bins

    out = np.zeros((ny * nx, dim), dtype=np.float64)
    cdef double[:, ::1] desc = out

    cdef Py_ssize_t gy, gx, py, px, y0, x0, idx
    cdef int cr, cc, bin_idx
    for gy in range(ny):
        for gx in range(nx):
            idx = gy * nx + gx
            y0 = gy * stride
            x0 = gx * stride
            for py in range(patch):
                cr = py // cell
                for px in range(patch):
                    cc = px // cell
                    bin_idx = <int> ori_bin[y0 + py, x0 + px]
                    desc[idx, (cr * n_cells + cc) * n_bins + bin_idx] += mag[y0 + py, x0 + px]
    return out


def forward_pass(double[:, ::1] b, double[:, ::1] transition, double[::1] initial):
    cdef Py_ssize_t t_len = b.shape[0]
    cdef Py_ssize_t k = b.shape[1]
    alpha_arr = np.empty((t_len, k), dtype=np.float64)
    lognorm_arr = np.empty(t_len, dtype=np.float64)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[::1] lognorm = lognorm_arr

    cdef Py_ssize_t t, i, j
    cdef double c = 0.0, f
    for j in range(k):
        alpha[0, j] = initial[j] * b[0, j]
        c += alpha[0, j]
    if c <= 0.0:
        raise FloatingPointError("forward mass underflowed at t=0")
    for j in range(k):
        alpha[0, j] /= c
    lognorm[0] = log(c)

    for t in range(1, t_len):
        c = 0.0
        for j in range(k):
            f = 0.0
            for i in range(k):
                f += alpha[t - 1, i] * transition[i, j]
            f *= b[t, j]
            alpha[t, j] = f
            c += f
        if c <= 0.0:
            raise FloatingPointError(f"forward mass underflowed at t={t}")
        for j in range(k):
            alpha[t, j] /= c
        lognorm[t] = log(c)
    return alpha_arr, lognorm_arr


def backward_pass(double[:, ::1] b, double[:, ::1] transition, double[::1] norms):
    cdef Py_ssize_t t_len = b.shape[0]
    cdef Py_ssize_t k = b.shape[1]
    beta_arr = np.empty((t_len, k), dtype=np.float64)
    cdef double[:, ::1] beta = beta_arr

    cdef Py_ssize_t t, i, j
    cdef double s
    for j in range(k):
        beta[t_len - 1, j] = 1.0
    for t in range(t_len - 2, -1, -1):
        for i in range(k):
            s = 0.0
            for j in range(k):
                s += transition[i, j] * b[t + 1, j] * beta[t + 1, j]
            beta[t, i] = s / norms[t + 1]
    return beta_arr
