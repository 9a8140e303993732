import math

import numpy as np
import pytest

from mqednmr.constants import CONSTANTS
from mqednmr.spin import (SpinKmsState, SpinSpec, correlation, evolve_matrix, expectation_z,
                          free_evolve, high_temperature_Iz, kms_expectation, kms_trace, operator, u)

HB = CONSTANTS.hbar
OPS = ("Ix", "Iy", "Iz", "Iplus", "Iminus")


def test_commutation_relations():
    ix, iy, iz = operator("Ix"), operator("Iy"), operator("Iz")
    assert np.allclose(ix @ iy - iy @ ix, 1j * HB * iz, atol=0, rtol=1e-14)
    assert np.allclose(operator("Iplus"), ix + 1j * iy)
    with pytest.raises(ValueError):
        operator("Iw")


def test_spec_validation():
    with pytest.raises(ValueError):
        SpinSpec(0.0)
    e = SpinSpec.electron()
    assert e.moment_prefactor == pytest.approx(CONSTANTS.g_s * CONSTANTS.mu_B / HB)
    assert SpinSpec.proton().larmor(20.0) > 0 and e.larmor(1.0) < 0


@pytest.mark.parametrize("spec", [SpinSpec.proton(), SpinSpec.electron()])
def test_free_evolution_matches_dense(spec):
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = complex(rng.uniform(-1e-8, 1e-8), rng.uniform(-1e-11, 1e-11))
        b = rng.uniform(0.1, 30)
        for op in OPS:
            a = free_evolve(op, t, spec, b)
            d = evolve_matrix(op, t, spec, b)
            assert np.allclose(a, d, rtol=1e-10, atol=1e-12 * np.abs(d).max())


def test_free_evolution_group_and_period():
    spec, b = SpinSpec.proton(), 20.0
    nu = spec.larmor(b)
    a = free_evolve(free_evolve("Ix", 1e-9, spec, b), 2e-9, spec, b)
    assert np.allclose(a, free_evolve("Ix", 3e-9, spec, b), atol=1e-48)
    assert np.allclose(free_evolve("Iz", 0.37, spec, b), operator("Iz"))
    assert np.allclose(free_evolve("Iplus", 2 * math.pi / nu, spec, b), operator("Iplus"), atol=1e-45)
    assert u(0.0, spec, b) == 1.0


def test_kms_expectation_matches_trace():
    spec = SpinSpec.proton()
    for beta in (1e18, 1e22, 1e25):
        st = SpinKmsState(beta, 20.0, spec)
        for a in OPS:
            for c in OPS:
                prod = operator(a) @ operator(c)
                assert kms_expectation([a, c], st) == pytest.approx(kms_trace(prod, st), rel=1e-10, abs=1e-80)


def test_correlation_oracle_random():
    rng = np.random.default_rng(1)
    for _ in range(300):
        spec = SpinSpec.proton() if rng.random() < 0.5 else SpinSpec.electron()
        beta = 10 ** rng.uniform(18, 24)
        b = rng.uniform(0.01, 10)
        st = SpinKmsState(beta, b, spec)
        z = complex(rng.uniform(-1e-9, 1e-9), rng.uniform(0, beta * HB))
        a, c = rng.choice(OPS, 2)
        dense = kms_trace(operator(a) @ evolve_matrix(c, z, spec, b), st)
        closed = correlation(a, c, z, st)
        assert abs(closed - dense) <= 1e-10 * HB**2 + 1e-10 * abs(dense)


def test_kms_boundary_condition():
    spec = SpinSpec.electron()
    st = SpinKmsState(1.0 / (CONSTANTS.k_B * 2.0), 1.0, spec)
    t = 3e-11
    for a in OPS:
        for c in OPS:
            lhs = correlation(a, c, t + 1j * st.beta * HB, st)
            rhs = kms_trace(evolve_matrix(c, t, spec, 1.0) @ operator(a), st)
            assert abs(lhs - rhs) <= 1e-10 * HB**2


def test_iz_limits():
    spec = SpinSpec.proton()
    st = SpinKmsState(1.0 / (CONSTANTS.k_B * 293.0), 20.0, spec)
    # y ~ 1e-5 at 20 T and room temperature: tanh(y/2) = y/2 to relative 1e-11
    assert expectation_z(st) == pytest.approx(high_temperature_Iz(st), rel=1e-9)
    cold = SpinKmsState(1e40, 1.0, spec)
    assert expectation_z(cold) == pytest.approx(HB / 2, rel=1e-12)
    with pytest.warns(RuntimeWarning):
        high_temperature_Iz(cold)
    assert SpinKmsState(0.0, 1.0, spec).populations == (0.5, 0.5)
    with pytest.raises(ValueError):
        SpinKmsState(-1.0, 1.0, spec)
