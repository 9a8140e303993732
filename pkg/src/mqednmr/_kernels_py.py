"""Pure-numpy reference versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def shielding_integrand(k, r, s, amp, prefactor, hbar_c, x_per_k):
    """Polarisation-summed m^zz(x, i hbar s2, x + r, i hbar s1, k) per sample.

    prefactor * (|k|^2 - k_z^2) amp^2 / |k| * 2 cos(k.r) * (1 + 2 rho)
    * exp(-hbar c |k| (s1 + s2)), where rho = 1/expm1(x_per_k |k|).
    ``prefactor`` already contains C_mode^2 / c.
    """
    kn = np.sqrt(np.einsum("ij,ij->i", k, k))
    pol = kn * kn - k[:, 2] * k[:, 2]
    coth = 1.0 + 2.0 / np.expm1(x_per_k * kn)
    kr = np.einsum("ij,ij->i", k, r)
    decay = np.exp(-hbar_c * kn * (s[:, 0] + s[:, 1]))
    return prefactor * pol * amp * amp / kn * 2.0 * np.cos(kr) * coth * decay


def damped_sum(weights, rates, offsets, t):
    """sum_j w_j exp(-(rate_j + i offset_j) t_n) for every t_n."""
    z = -(np.asarray(rates)[:, None] + 1j * np.asarray(offsets)[:, None]) * np.asarray(t)[None, :]
    return np.asarray(weights, dtype=complex) @ np.exp(z)
