"""Kernel backend selection.

The compiled Cython module is used when it has been built; otherwise the numpy
versions are used. Setting ``MQEDNMR_BACKEND=python`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MQEDNMR_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def shielding_integrand(k, r, s, amp, prefactor, hbar_c, x_per_k):
    import numpy as np
    return _impl.shielding_integrand(
        np.ascontiguousarray(k, dtype=float), np.ascontiguousarray(r, dtype=float),
        np.ascontiguousarray(s, dtype=float), np.ascontiguousarray(amp, dtype=float),
        float(prefactor), float(hbar_c), float(x_per_k))


def damped_sum(weights, rates, offsets, t):
    import numpy as np
    return _impl.damped_sum(np.asarray(weights, dtype=complex),
                            np.ascontiguousarray(rates, dtype=float),
                            np.ascontiguousarray(offsets, dtype=float),
                            np.ascontiguousarray(t, dtype=float))


def get_backend(name):
    """Module implementing ``name`` ('python' or 'cython'); for tests and benchmarks."""
    if name == "python":
        return _kernels_py
    from . import _kernels
    return _kernels
