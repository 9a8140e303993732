# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, exp, expm1, fabs

cnp.import_array()


def shielding_integrand(double[:, ::1] k, double[:, ::1] r, double[:, ::1] s,
                        double[::1] amp, double prefactor, double hbar_c, double x_per_k):
    cdef Py_ssize_t n = k.shape[0], i
    cdef double kn, pol, coth, kr, decay
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        kn = sqrt(k[i, 0] * k[i, 0] + k[i, 1] * k[i, 1] + k[i, 2] * k[i, 2])
        pol = kn * kn - k[i, 2] * k[i, 2]
        coth = 1.0 + 2.0 / expm1(x_per_k * kn)
        kr = k[i, 0] * r[i, 0] + k[i, 1] * r[i, 1] + k[i, 2] * r[i, 2]
        decay = exp(-hbar_c * kn * (s[i, 0] + s[i, 1]))
        o[i] = prefactor * pol * amp[i] * amp[i] / kn * 2.0 * cos(kr) * coth * decay
    return out


def damped_sum(weights, double[::1] rates, double[::1] offsets, double[::1] t):
    """On uniform grids each term is advanced by a complex rotation per step and
    re-anchored with a direct evaluation every 64 steps."""
    cdef double complex[::1] w = np.ascontiguousarray(weights, dtype=np.complex128)
    cdef Py_ssize_t nj = rates.shape[0], nt = t.shape[0], j, n
    out = np.zeros(nt, dtype=np.complex128)
    cdef double[:, ::1] acc = np.zeros((nt, 2), dtype=np.float64)
    cdef double a, ph, wr, wi, zr, zi, sr, si, tmp, dt = 0.0
    cdef bint uniform = nt > 1
    if uniform:
        dt = t[1] - t[0]
        for n in range(2, nt):
            if fabs((t[n] - t[0]) - n * dt) > 1e-12 * fabs(t[n]) + 1e-300:
                uniform = False
                break
    for j in range(nj):
        wr = w[j].real
        wi = w[j].imag
        if wr == 0.0 and wi == 0.0:
            continue
        if uniform:
            a = exp(-rates[j] * dt)
            sr = a * cos(offsets[j] * dt)
            si = -a * sin(offsets[j] * dt)
        for n in range(nt):
            if not uniform or n % 64 == 0:
                a = exp(-rates[j] * t[n])
                ph = offsets[j] * t[n]
                zr = a * cos(ph)
                zi = -a * sin(ph)
            else:
                tmp = zr * sr - zi * si
                zi = zr * si + zi * sr
                zr = tmp
            acc[n, 0] += wr * zr - wi * zi
            acc[n, 1] += wr * zi + wi * zr
    cdef double complex[::1] o = out
    for n in range(nt):
        o[n] = acc[n, 0] + 1j * acc[n, 1]
    return out
