"""Spectra from time signals, ppm axes and Lorentzian line fits.

The transform is S(nu) = int_0^inf <M+>(t) e^{+i nu t} dt with nu angular, so a
signal 0.5 e^{-i nu~ t} e^{-t/T2} peaks at nu = nu~. Frequencies are kept as
offsets from the signal's reference frequency to preserve precision at
tesla-scale carriers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .dynamics import SignalSeries

ENVELOPE_CUTOFF = 1e-4
ZERO_PAD = 4


@dataclass
class Spectrum:
    """Complex spectrum on an increasing angular-frequency grid.

    ``offset`` is nu - nu_ref in rad/s; ``nu0`` is the ppm reference.
    """

    offset: np.ndarray
    values: np.ndarray
    nu_ref: float = 0.0
    nu0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.offset = np.asarray(self.offset, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.offset.shape != self.values.shape or self.offset.ndim != 1:
            raise ValueError("offset and values must be 1D arrays of equal length")
        if np.any(np.diff(self.offset) <= 0.0):
            raise ValueError("frequency grid must be strictly increasing")

    @property
    def nu(self) -> np.ndarray:
        return self.nu_ref + self.offset

    @property
    def nu_hz(self) -> np.ndarray:
        return self.nu / (2.0 * math.pi)

    @property
    def ppm(self) -> np.ndarray:
        if self.nu0 == 0.0:
            raise ValueError("spectrum has no ppm reference")
        return (self.nu_ref - self.nu0 + self.offset) / abs(self.nu0) * 1e6

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def truncation_index(samples: np.ndarray, cutoff: float = ENVELOPE_CUTOFF) -> int | None:
    """Samples kept: through the last point at or above cutoff * |s0|.

    Beating signals can dip below the cutoff and recover, so the cut is placed
    after the final crossing. ``None`` if the signal ends above the cutoff.
    """
    env = np.abs(samples)
    ref = env[0] if env[0] > 0 else env.max(initial=0.0)
    if ref == 0.0:
        return samples.size
    if env[-1] >= cutoff * ref:
        return None
    above = np.nonzero(env >= cutoff * ref)[0]
    return int(above[-1]) + 2 if above.size else 1


def transform(signal: SignalSeries, *, zero_pad: int = ZERO_PAD,
              cutoff: float = ENVELOPE_CUTOFF, keep: int | None = None) -> Spectrum:
    """One-sided trapezoidal Fourier integral of the sampled signal.

    The signal is cut after the last sample whose envelope reaches ``cutoff``
    of the initial value, then zero-padded by ``zero_pad``; a signal that never
    decays that far is transformed as is and flagged in ``meta``. ``keep``
    fixes the number of retained samples instead, so that several signals
    share one frequency grid.
    """
    s = np.asarray(signal.samples, dtype=complex)
    if not np.all(np.isfinite(s)):
        raise ValueError("signal contains non-finite samples")
    flags = []
    n_keep = truncation_index(s, cutoff) if keep is None else min(int(keep), s.size)
    if n_keep is None:
        n_keep = s.size
        flags.append("signal does not decay below cutoff; truncated at grid end")
        warnings.warn("transforming a signal that has not decayed", RuntimeWarning, stacklevel=2)
    s = s[:n_keep].copy()
    s[0] *= 0.5
    if n_keep > 1:
        s[-1] *= 0.5
    n = zero_pad * n_keep
    dt = signal.dt
    # sum_n s_n e^{+i w t_n} for w = 2 pi m / (n dt): n * ifft
    vals = np.fft.fftshift(np.fft.ifft(s, n)) * n * dt
    w = np.fft.fftshift(np.fft.fftfreq(n, d=dt)) * 2.0 * math.pi
    vals *= np.exp(1j * w * signal.t0)
    nu_ref = signal.nu_ref if signal.frame == "rotating" else 0.0
    nu0 = abs(signal.meta.get("nu_ref_rad_s", signal.nu_ref))
    meta = dict(signal.meta)
    meta.update({"kept_samples": n_keep, "zero_pad": zero_pad, "transform_flags": flags})
    return Spectrum(w, vals, nu_ref, nu0, meta)


def lorentzian_spectrum(offset, amplitude, rate, center, nu_ref=0.0, nu0=0.0) -> Spectrum:
    """Exact one-sided transform of amplitude e^{-i(center) t} e^{-rate t}."""
    offset = np.asarray(offset, dtype=float)
    vals = amplitude / (rate - 1j * (offset - center))
    return Spectrum(offset, vals, nu_ref, nu0)


@dataclass
class LorentzFit:
    center_ppm: float
    fwhm: float  # Hz, absorptive line
    height: float
    rms_residual: float
    center_offset: float = 0.0  # rad/s relative to nu_ref
    rate: float = 0.0  # 1/s
    mode: str = "magnitude"
    flags: list[str] = field(default_factory=list)

    @property
    def t2(self) -> float:
        return 1.0 / self.rate


def _peak_window(mag: np.ndarray, i0: int, floor: float) -> tuple[int, int]:
    lo = i0
    while lo > 0 and mag[lo - 1] <= mag[lo] and mag[lo - 1] >= floor:
        lo -= 1
    hi = i0
    while hi < mag.size - 1 and mag[hi + 1] <= mag[hi] and mag[hi + 1] >= floor:
        hi += 1
    return lo, hi + 1


def _other_peaks(mag: np.ndarray, lo: int, hi: int, level: float) -> bool:
    inner = (mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:]) & (mag[1:-1] > level)
    idx = np.nonzero(inner)[0] + 1
    return bool(np.any((idx < lo) | (idx >= hi)))


def _mag_model(x, amp, rate, center):
    return amp / np.sqrt(rate**2 + (x - center) ** 2)


def fit_lorentz(spec: Spectrum, mode: str = "magnitude", window_floor: float = 0.05) -> LorentzFit:
    """Least-squares Lorentzian fit around the global maximum of |S|.

    ``magnitude`` fits |S| = A / sqrt(rate^2 + (nu - c)^2). ``phase-corrected``
    fits the complex line A e^{i p} / (rate - i (nu - c)) and reports the
    absorptive part. The fit window runs outward from the maximum while |S|
    falls monotonically and stays above ``window_floor`` of the peak. The
    residual is the RMS misfit over the window divided by the peak height.
    FWHM is that of the absorptive line, rate / pi in Hz.
    """
    mag = spec.magnitude
    if not np.any(mag > 0):
        raise ValueError("spectrum is identically zero")
    i0 = int(np.argmax(mag))
    peak = mag[i0]
    lo, hi = _peak_window(mag, i0, window_floor * peak)
    flags = []
    if _other_peaks(mag, lo, hi, 0.1 * peak):
        flags.append("multimodal spectrum: fitted the global maximum only")
    if hi - lo < 5:
        raise ValueError("peak is resolved by fewer than 5 points")
    x = spec.offset[lo:hi]
    xs = x - spec.offset[i0]
    half = mag[lo:hi] >= 0.5 * peak
    width0 = max(0.5 * (xs[half].max() - xs[half].min()) / math.sqrt(3.0), np.diff(x).min())
    with warnings.catch_warnings():
        # the parameter covariance is not used
        warnings.simplefilter("ignore", OptimizeWarning)
        return _fit(spec, mode, lo, hi, i0, xs, peak, width0, flags)


def _fit(spec, mode, lo, hi, i0, xs, peak, width0, flags):
    mag = spec.magnitude
    if mode == "magnitude":
        y = mag[lo:hi]
        p0 = (peak * width0, width0, 0.0)
        p, _ = curve_fit(_mag_model, xs, y, p0=p0, maxfev=20000, xtol=1e-14, ftol=1e-14)
        amp, rate, c = p
        rate = abs(rate)
        model = _mag_model(xs, amp, rate, c)
        resid = y - model
    elif mode == "phase-corrected":
        y = spec.values[lo:hi]
        phase0 = float(np.angle(spec.values[i0]))

        def stacked(xx, amp, rate, c, ph):
            m = amp * np.exp(1j * ph) / (rate - 1j * (xx - c))
            return np.concatenate([m.real, m.imag])

        p, _ = curve_fit(stacked, xs, np.concatenate([y.real, y.imag]),
                         p0=(peak * width0, width0, 0.0, phase0), maxfev=20000,
                         xtol=1e-14, ftol=1e-14)
        amp, rate, c, ph = p
        if rate < 0:
            amp, rate, ph = -amp, -rate, ph
        absorb = (y * np.exp(-1j * ph)).real
        model = amp * rate / (rate**2 + (xs - c) ** 2)
        resid = absorb - model
    else:
        raise ValueError(f"unknown fit mode {mode!r}")
    height = abs(amp) / rate
    rms = float(np.sqrt(np.mean(np.abs(resid) ** 2)) / height)
    center = spec.offset[i0] + c
    if spec.nu0:
        center_ppm = float((spec.nu_ref - spec.nu0 + center) / abs(spec.nu0) * 1e6)
    else:
        center_ppm = float("nan")
    return LorentzFit(center_ppm, float(rate / math.pi), float(height), rms,
                      float(center), float(rate), mode, flags)


def carrier_frequency(signal: SignalSeries) -> float:
    """Precession frequency (rad/s) from a linear fit to the unwrapped phase."""
    s = signal.samples
    keep = np.abs(s) > ENVELOPE_CUTOFF * np.abs(s).max()
    t = signal.t[keep]
    ph = np.unwrap(np.angle(s[keep]))
    w = np.abs(s[keep]) ** 2
    slope = np.polyfit(t, ph, 1, w=np.sqrt(w))[0]
    if signal.frame == "rotating":
        return float(signal.nu_ref - slope)
    return float(-slope)


def quadrature_phase(x: np.ndarray, y: np.ndarray, t: np.ndarray, nu: float) -> float:
    """Phase of y minus phase of x (degrees) at angular frequency nu.

    Both traces are demodulated against e^{i nu t} under a Hann window, which
    suppresses leakage from the counter-rotating component.
    """
    t = np.asarray(t, dtype=float)
    win = np.hanning(t.size)
    ref = np.exp(1j * nu * t) * win
    cx = np.sum(np.asarray(x) * ref)
    cy = np.sum(np.asarray(y) * ref)
    lag = math.degrees(float(np.angle(cy / cx)))
    return (lag + 180.0) % 360.0 - 180.0


__all__ = [
    "ENVELOPE_CUTOFF",
    "ZERO_PAD",
    "Spectrum",
    "LorentzFit",
    "truncation_index",
    "transform",
    "lorentzian_spectrum",
    "fit_lorentz",
    "carrier_frequency",
    "quadrature_phase",
]
