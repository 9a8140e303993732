import math

import numpy as np
import pytest

from mqednmr.dynamics import SignalSeries, effective_relax_signal
from mqednmr.spectrum import (Spectrum, carrier_frequency, fit_lorentz, lorentzian_spectrum,
                              quadrature_phase, transform, truncation_index)

NU0 = 2 * math.pi * 850e6


def decaying(rate=50.0, center=300.0, n=20000, dt=1e-4, amp=0.5):
    t = dt * np.arange(n)
    return SignalSeries(0.0, dt, amp * np.exp(-1j * center * t - rate * t), "rotating", NU0,
                        {"nu_ref_rad_s": NU0})


def test_transform_matches_analytic_lorentzian():
    sig = decaying()
    spec = transform(sig)
    exact = lorentzian_spectrum(spec.offset, 0.5, 50.0, 300.0).values
    # trapezoid error is O((nu dt)^2) near the line
    near = np.abs(spec.offset - 300.0) < 2000
    assert np.allclose(spec.values[near], exact[near], rtol=1e-3, atol=1e-6)


def test_transform_linearity():
    a, b = decaying(40.0, 100.0), decaying(80.0, -500.0)
    both = SignalSeries(0.0, a.dt, 2.0 * a.samples - 0.5j * b.samples, "rotating", NU0)
    keep = 15000
    sa, sb, sab = (transform(s, keep=keep) for s in (a, b, both))
    assert np.allclose(sab.values, 2.0 * sa.values - 0.5j * sb.values, rtol=1e-12, atol=1e-14)


def test_parseval():
    sig = decaying(30.0, 200.0, n=8192)
    keep = sig.samples.size
    spec = transform(sig, keep=keep, zero_pad=1)
    s = sig.samples.copy()
    s[0] *= 0.5
    s[-1] *= 0.5
    lhs = np.sum(np.abs(s) ** 2) * sig.dt
    dnu = spec.offset[1] - spec.offset[0]
    rhs = np.sum(np.abs(spec.values) ** 2) * dnu / (2 * math.pi)
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_ppm_axis_and_peak_sign():
    sig = effective_relax_signal(3.0, 0.05, NU0, np.linspace(0, 2.0, 400001))
    spec = transform(sig)
    fit = fit_lorentz(spec)
    assert fit.center_ppm == pytest.approx(-3.0, abs=1e-4)
    assert fit.t2 == pytest.approx(0.05, rel=1e-4)
    assert fit.rms_residual < 1e-3 and not fit.flags


def test_fit_phase_corrected_mode():
    spec = lorentzian_spectrum(np.linspace(-2000, 2000, 4001), 0.5 * np.exp(0.4j), 60.0, 120.0,
                               NU0, NU0)
    fit = fit_lorentz(spec, mode="phase-corrected")
    assert fit.rate == pytest.approx(60.0, rel=1e-8)
    assert fit.center_offset == pytest.approx(120.0, rel=1e-8)
    assert fit.height == pytest.approx(0.5 / 60.0, rel=1e-8)
    assert fit.rms_residual < 1e-8
    with pytest.raises(ValueError):
        fit_lorentz(spec, mode="dispersive")


def test_fit_flags_multimodal():
    off = np.linspace(-3000, 3000, 6001)
    v = lorentzian_spectrum(off, 0.5, 40, -800).values + lorentzian_spectrum(off, 0.4, 40, 900).values
    fit = fit_lorentz(Spectrum(off, v, NU0, NU0))
    assert any("multimodal" in f for f in fit.flags)


def test_carrier_within_one_bin_of_peak():
    sig = decaying(20.0, 700.0, n=40000)
    spec = transform(sig)
    carrier = carrier_frequency(sig)
    peak = spec.nu[np.argmax(spec.magnitude)]
    assert abs(carrier - peak) <= spec.offset[1] - spec.offset[0]
    # stored samples are demodulated, so e^{-i 700 t} sits 700 rad/s above nu_ref
    assert carrier == pytest.approx(NU0 + 700.0, abs=1e-6)


def test_truncation_rule():
    s = np.exp(-np.arange(100) / 5.0)
    n = truncation_index(s)
    # keeps one sample past the last one at or above the cutoff
    assert s[n - 2] >= 1e-4 and s[n - 1] < 1e-4
    beat = np.abs(np.cos(np.arange(300) / 10.0)) * np.exp(-np.arange(300) / 15.0)
    n = truncation_index(beat)
    first_dip = int(np.argmax(beat < 1e-4))
    assert n is not None and n > first_dip + 10
    assert np.all(beat[n - 1:] < 1e-4)
    assert truncation_index(np.ones(10)) is None


def test_non_decaying_signal_flagged():
    sig = SignalSeries(0.0, 1e-3, np.ones(100), "rotating", NU0)
    with pytest.warns(RuntimeWarning):
        spec = transform(sig)
    assert spec.meta["transform_flags"]
    with pytest.raises(ValueError):
        transform(SignalSeries(0.0, 1e-3, np.array([1.0, np.nan]), "rotating", NU0))


def test_quadrature_phase():
    t = np.linspace(0, 1e-6, 5000)
    nu = 2 * math.pi * 40e6
    x = np.cos(nu * t)
    y = np.sin(nu * t)
    assert quadrature_phase(x, y, t, nu) == pytest.approx(90.0, abs=0.01)
    assert quadrature_phase(y, x, t, nu) == pytest.approx(-90.0, abs=0.01)


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 0.0]), np.zeros(2))
    with pytest.raises(ValueError):
        Spectrum(np.array([0.0, 1.0]), np.zeros(2)).ppm
    with pytest.raises(ValueError):
        fit_lorentz(Spectrum(np.arange(10.0), np.zeros(10)))
