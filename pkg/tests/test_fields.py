import math

import numpy as np
import pytest

from mqednmr.constants import CONSTANTS, ThermalParams, mm_inv_to_si
from mqednmr.fields import (MODE_PREFACTOR, BandCoupling, CouplingFunction, commutator_propagator,
                            exchange_kernel, exchange_kernel_closed, field_commutator,
                            mode_function, planck_occupation, polarization_basis)

TH = ThermalParams(293.0)
PHI = CouplingFunction(0.0, mm_inv_to_si(8.0))


def rand_k(rng, scale=4e3):
    return rng.normal(size=3) * scale


def test_coupling_normalisation_and_support():
    phi = CouplingFunction(1.0, 5.0)
    assert phi.g * (phi.delta_uv - phi.delta_ir) == 1.0
    assert phi(3.0) == phi.g and phi(0.5) == 0.0 and phi(6.0) == 0.0
    with pytest.raises(ValueError):
        CouplingFunction(5.0, 1.0)
    with pytest.raises(ValueError):
        CouplingFunction(-1.0, 1.0)


def test_band_coupling():
    b = BandCoupling(((3.0, 4.0, 2.0), (1.0, 2.0, 1.0)))
    assert b.bands[0][0] == 1.0
    assert b(1.5) == 1.0 and b(3.5) == 2.0 and b(2.5) == 0.0
    assert BandCoupling().empty
    with pytest.raises(ValueError):
        BandCoupling(((1.0, 3.0, 1.0), (2.0, 4.0, 1.0)))


def test_polarization_basis():
    b = polarization_basis(np.array([0.0, 0.0, 1.0]))
    assert np.allclose(b.eps1, [1, 0, 0]) and np.allclose(b.eps2, [0, 1, 0])
    rng = np.random.default_rng(2)
    for _ in range(200):
        k = rand_k(rng)
        b = polarization_basis(k)
        m = np.array([b.eps1, b.eps2, b.khat])
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-14)
        assert abs(b.eps1 @ k) < 1e-10 * np.linalg.norm(k)
    with pytest.raises(ValueError):
        polarization_basis(np.zeros(3))


def test_planck():
    k = math.log(2.0) / TH.x_per_wavenumber
    assert planck_occupation(k, TH) == pytest.approx(1.0, rel=1e-14)
    assert planck_occupation(1e3, TH) == pytest.approx(127.5, rel=2e-3)
    assert planck_occupation(1e9, TH) < 1e-100
    ks = np.linspace(10.0, 1e5, 50)
    rho = planck_occupation(ks, TH)
    assert np.all(np.diff(rho) < 0)
    assert np.allclose((1 + rho) / rho, np.exp(TH.x_per_wavenumber * ks), rtol=1e-12)
    with pytest.raises(ValueError):
        planck_occupation(0.0, TH)


def test_mode_function_examples():
    k = np.array([1e3, 2e3, -5e2])
    b = polarization_basis(k)
    omega = CONSTANTS.c * np.linalg.norm(k)
    v = mode_function("z", np.zeros(3), 0.0, k, 1, PHI)
    expected = 1j * MODE_PREFACTOR * np.cross(k, b.eps1)[2] * PHI.g / math.sqrt(omega)
    assert v == pytest.approx(expected, rel=1e-14)
    far = np.array([1e4, 0.0, 0.0])
    assert mode_function("x", np.ones(3), 0.0, far, 2, PHI) == 0
    a = mode_function("y", np.ones(3), 0.3 + 1e-15j, k, 2, PHI)
    c = mode_function("y", np.ones(3), 1.7 + 1e-15j, k, 2, PHI)
    assert abs(a) == pytest.approx(abs(c), rel=1e-12)
    with pytest.raises(ValueError):
        mode_function("x", np.zeros(3), 0.0, np.zeros(3), 1, PHI)


def test_mode_function_basis_rotation_invariance():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = rand_k(rng)
        b = polarization_basis(k)
        rb = b.rotated(rng.uniform(0, 2 * math.pi))
        x = rng.normal(size=3) * 1e-10
        for ax in "xyz":
            s1 = sum(abs(mode_function(ax, x, 0.0, k, lam, PHI, b)) ** 2 for lam in (1, 2))
            s2 = sum(abs(mode_function(ax, x, 0.0, k, lam, PHI, rb)) ** 2 for lam in (1, 2))
            assert s1 == pytest.approx(s2, rel=1e-12)


def _random_args(rng, equal_real=False):
    x, y = rng.normal(size=3) * 1e-10, rng.normal(size=3) * 1e-10
    bh = TH.beta * CONSTANTS.hbar
    r1 = rng.uniform(0, 1e-12)
    r2 = r1 if equal_real else rng.uniform(0, 1e-12)
    z1 = complex(r1, rng.uniform(0, bh))
    z2 = complex(r2, rng.uniform(0, bh))
    return x, y, z1, z2, rand_k(rng)


def test_exchange_kernel_closed_form_matches_literal_sum():
    rng = np.random.default_rng(4)
    for _ in range(200):
        x, y, z1, z2, k = _random_args(rng)
        a, g = rng.choice(list("xyz"), 2)
        lit = exchange_kernel(a, g, x, y, z1, z2, k, PHI, TH)
        closed = exchange_kernel_closed(a, g, x, y, z1, z2, k, PHI, TH)[0]
        assert abs(lit - closed) <= 1e-12 * max(abs(lit), abs(closed)) + 1e-300


def test_exchange_kernel_basis_independence():
    rng = np.random.default_rng(5)
    for _ in range(200):
        x, y, z1, z2, k = _random_args(rng)
        a, g = rng.choice(list("xyz"), 2)
        b = polarization_basis(k).rotated(rng.uniform(0, 2 * math.pi))
        v1 = exchange_kernel(a, g, x, y, z1, z2, k, PHI, TH)
        v2 = exchange_kernel(a, g, x, y, z1, z2, k, PHI, TH, basis=b)
        assert abs(v1 - v2) <= 1e-12 * abs(v1) + 1e-300


def test_exchange_kernel_swap_symmetry_at_equal_real_times():
    rng = np.random.default_rng(6)
    for _ in range(200):
        x, y, z1, z2, k = _random_args(rng, equal_real=True)
        a, g = rng.choice(list("xyz"), 2)
        v = exchange_kernel(a, g, x, y, z1, z2, k, PHI, TH)
        w = exchange_kernel(a, g, x, y, z2, z1, k, PHI, TH)
        assert abs(v - w) <= 1e-12 * abs(v) + 1e-300


def test_exchange_kernel_swap_breaks_for_distinct_real_times():
    # documented limitation: the symmetry needs Re z1 == Re z2
    k = np.array([3e3, 0.0, 1e3])
    v = exchange_kernel("z", "z", np.zeros(3), np.zeros(3), 0.0, 1e-12, k, PHI, TH)
    w = exchange_kernel("z", "z", np.zeros(3), np.zeros(3), 1e-12, 0.0, k, PHI, TH)
    assert abs(v - w) > 1e-6 * abs(v)


def test_exchange_kernel_strip_and_support():
    k = np.array([1e3, 0, 0])
    with pytest.raises(ValueError):
        exchange_kernel("x", "x", np.zeros(3), np.zeros(3), -1.0, 0.0, k, PHI, TH)
    with pytest.raises(ValueError):
        exchange_kernel("x", "x", np.zeros(3), np.zeros(3), 1j * TH.beta, 0.0, k, PHI, TH)
    empty_k = np.array([1e5, 0, 0])
    assert exchange_kernel("x", "y", np.zeros(3), np.zeros(3), 0, 0, empty_k, PHI, TH) == 0


def test_exchange_kernel_reproduces_shielding_integrand():
    """Angular average of m^zz at x = y, imaginary times, against the radial form."""
    from mqednmr.shielding import REDUCTION, thermal_factor
    kmag = 5e3
    hb = CONSTANTS.hbar
    # Lebedev-free check: Gauss-Legendre in cos(theta), the zz polarization factor
    # depends only on the polar angle
    nodes, weights = np.polynomial.legendre.leggauss(32)
    s_nodes, s_w = np.polynomial.legendre.leggauss(40)
    beta = TH.beta
    total = 0.0
    for s1n, s1w in zip(s_nodes, s_w):
        s1 = 0.5 * beta * (s1n + 1)
        for s2n, s2w in zip(s_nodes, s_w):
            s2 = 0.5 * s1 * (s2n + 1)
            ang = 0.0
            for c, wc in zip(nodes, weights):
                k = kmag * np.array([math.sqrt(1 - c * c), 0.0, c])
                ang += wc * exchange_kernel_closed("z", "z", np.zeros(3), np.zeros(3),
                                                   1j * hb * s2, 1j * hb * s1, k, PHI, TH)[0].real
            total += 0.5 * beta * s1w * 0.5 * s1 * s2w * 2 * math.pi * ang
    # total = int over the simplex and the sphere at fixed |k|; times k^2 gives the radial integrand
    radial = total * kmag**2
    expected = REDUCTION * kmag * PHI.g**2 * thermal_factor(TH.x_per_wavenumber * kmag)
    assert radial == pytest.approx(expected, rel=1e-9)


def test_commutator_propagator():
    rng = np.random.default_rng(7)
    for _ in range(200):
        k = rand_k(rng)
        d = np.concatenate([rng.normal(size=3) * 1e-4, rng.normal(size=1) * 1e-12])
        v = commutator_propagator(k, d)
        assert abs(v.real) <= 1e-14 * max(abs(v), 1e-300)
        assert commutator_propagator(k, -d) == pytest.approx(-v, rel=1e-14, abs=1e-300)
    assert commutator_propagator(np.array([1.0, 2.0, 3.0]), np.zeros(4)) == 0
    with pytest.raises(ValueError):
        commutator_propagator(np.zeros(3), np.zeros(4))


def test_field_commutator_properties():
    x = np.array([1e-4, 0.0, 1e-4])
    y = np.zeros(3)
    # equal times: [B(x,t), B(y,t)] vanishes outside the light cone
    assert field_commutator("z", x, 0.0, "x", y, 0.0, PHI) == 0
    a = field_commutator("z", x, 2e-13, "x", y, 0.0, PHI)
    b = field_commutator("x", y, 0.0, "z", x, 2e-13, PHI)
    assert a == pytest.approx(-b, rel=1e-12)
    assert abs(a.real) == 0.0
