import numpy as np
import pytest

from mqednmr import _kernels_py, kernels

try:
    from mqednmr import _kernels as _cy
except ImportError:  # pragma: no cover - the fallback alone is tested then
    _cy = None

needs_cython = pytest.mark.skipif(_cy is None, reason="compiled kernels not built")


def shielding_args(n=5000, seed=0):
    rng = np.random.default_rng(seed)
    k = rng.normal(size=(n, 3)) * 5e3
    r = rng.normal(size=(n, 3)) * 5e-11
    s = rng.uniform(0, 2e20, size=(n, 2))
    amp = rng.uniform(0, 1e-3, size=n)
    return k, r, s, amp, 1.3e-3, 3.16e-26, 4.9e-6


def test_python_shielding_kernel_matches_loop():
    k, r, s, amp, pre, hc, xk = shielding_args(50)
    out = _kernels_py.shielding_integrand(k, r, s, amp, pre, hc, xk)
    for i in range(50):
        kn = np.linalg.norm(k[i])
        ref = (pre * (kn**2 - k[i, 2] ** 2) * amp[i] ** 2 / kn * 2 * np.cos(k[i] @ r[i])
               / np.tanh(0.5 * xk * kn) * np.exp(-hc * kn * s[i].sum()))
        assert out[i] == pytest.approx(ref, rel=1e-12)


@needs_cython
def test_backends_agree_shielding():
    args = shielding_args()
    a = _kernels_py.shielding_integrand(*args)
    b = _cy.shielding_integrand(*args)
    assert np.allclose(a, b, rtol=1e-13, atol=0)


@needs_cython
@pytest.mark.parametrize("uniform", [True, False])
def test_backends_agree_damped_sum(uniform):
    rng = np.random.default_rng(1)
    w = rng.normal(size=40) + 1j * rng.normal(size=40)
    rates = rng.uniform(0, 100, 40)
    offs = rng.uniform(-3000, 3000, 40)
    t = np.arange(3000) * 1e-4 if uniform else np.sort(rng.uniform(0, 0.3, 3000))
    a = _kernels_py.damped_sum(w, rates, offs, t)
    b = _cy.damped_sum(w, rates, offs, t)
    assert np.allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())


def test_damped_sum_definition():
    w = np.array([1.0 + 0j, 0.5j])
    rates = np.array([2.0, 3.0])
    offs = np.array([10.0, -4.0])
    t = np.linspace(0, 1, 11)
    ref = sum(w[j] * np.exp(-rates[j] * t - 1j * offs[j] * t) for j in range(2))
    assert np.allclose(kernels.damped_sum(w, rates, offs, t), ref, atol=1e-15)


def test_backend_selection():
    assert kernels.BACKEND in ("python", "cython")
    assert kernels.get_backend("python") is _kernels_py
