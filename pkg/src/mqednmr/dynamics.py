"""Time-domain NMR signal <M+>(t) after an excitation pulse.

The second-order exponent is assembled from the radial spectral weight of the
zz exchange kernel,

    W(k) = C_shield |phi(k)|^2 h(beta hbar c k) k F(k),     int W dk = a,

and the commutator part of the time-ordered double integral,

    Lambda_k(t) = int_0^t dt1 int_0^t1 dt2 omega_k sin(omega_k (t1 - t2))
                = t - sin(omega_k t) / omega_k.

With nu0 = gamma B the cumulant is K2(t) = -nu0 (1 - i) int dk W(k) Lambda_k(t):
its imaginary part lowers the precession frequency to nu0 (1 - a) and its real
part gives the decay rate a nu0 once omega_k t >> 1. The signal is
0.5 u(t) exp(K2(t)); the bare truncation 0.5 u(t) (1 + K2(t)) is available as a
small-t diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi

from . import kernels
from .constants import CONSTANTS, ThermalParams
from .fields import field_commutator
from .integrate import IntegratorConfig, time_ordered_2
from .molecular import ElectronDensity1s, MolecularState
from .shielding import shielding_integrand, shielding_reduced
from .spin import SpinSpec

_C = CONSTANTS.c

TERMS = ("zz exchange x Iy-Ix correlator (commutator part)",
         "zz exchange x Iy-Ix correlator (thermal part)")


@dataclass(frozen=True)
class PulseSpec:
    """Excitation pulse.

    ``ideal-90`` rotates the equilibrium polarization fully into the x axis
    before t = 0. ``rectangular`` applies B_P (T) for ``duration`` seconds with
    carrier ``phase`` (rad); the flip angle is gamma B_P duration and the pulse
    must cover nu0 inside ``bandwidth`` = (omega_lo, omega_hi) rad/s.
    """

    mode: str = "ideal-90"
    b_p: float = 0.0
    duration: float = 0.0
    phase: float = 0.0
    bandwidth: tuple[float, float] | None = None
    axis: str = "x"

    def __post_init__(self):
        if self.mode not in ("ideal-90", "rectangular"):
            raise ValueError(f"unknown pulse mode {self.mode!r}")
        if self.axis not in ("x", "y"):
            raise ValueError("pulse axis must be 'x' or 'y'")
        if self.mode == "rectangular":
            if not (self.b_p > 0.0 and self.duration > 0.0):
                raise ValueError("rectangular pulse needs b_p > 0 and duration > 0")
            if self.bandwidth is not None and not self.bandwidth[0] < self.bandwidth[1]:
                raise ValueError("pulse bandwidth must be an increasing interval")

    def initial_amplitude(self, spec: SpinSpec, field_z: float) -> complex:
        """<M+>(0) in units where the ideal 90 degree pulse gives 0.5."""
        base = 0.5 if self.axis == "x" else 0.5j
        if self.mode == "ideal-90":
            return complex(base)
        nu0 = abs(spec.larmor(field_z))
        if self.bandwidth is not None and not (self.bandwidth[0] <= nu0 <= self.bandwidth[1]):
            raise ValueError("pulse bandwidth does not contain the Larmor frequency")
        theta = abs(spec.gamma) * self.b_p * self.duration
        return complex(base * math.sin(theta) * np.exp(1j * self.phase))


@dataclass
class SignalSeries:
    """Uniformly sampled <M+>(t).

    In the ``rotating`` frame the stored samples are <M+>(t) e^{+i nu_ref t};
    ``lab_samples`` restores the carrier.
    """

    t0: float
    dt: float
    samples: np.ndarray
    frame: str = "rotating"
    nu_ref: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.frame not in ("rotating", "lab"):
            raise ValueError(f"unknown frame {self.frame!r}")

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    def lab_samples(self) -> np.ndarray:
        if self.frame == "lab":
            return self.samples
        return self.samples * np.exp(-1j * self.nu_ref * self.t)

    @property
    def ix(self) -> np.ndarray:
        return self.lab_samples().real

    @property
    def iy(self) -> np.ndarray:
        return self.lab_samples().imag


@dataclass(frozen=True)
class DecayParams:
    shift: float  # ppm
    rate: float  # 1/s
    amplitude: float

    @property
    def t2(self) -> float:
        return math.inf if self.rate == 0.0 else 1.0 / self.rate


def _uniform_grid(t_grid) -> tuple[float, float, np.ndarray]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid must be a 1D array with at least two points")
    if np.any(t < 0.0):
        raise ValueError("times must be non-negative")
    d = np.diff(t)
    if not (np.all(d > 0.0) and np.allclose(d, d[0], rtol=1e-9, atol=0.0)):
        raise ValueError("t_grid must be uniformly spaced and increasing")
    return float(t[0]), float(d[0]), t


def _bohr_radius(state: MolecularState | None) -> float:
    if state is None:
        return CONSTANTS.a_B
    if not isinstance(state.electron, ElectronDensity1s):
        raise ValueError("dynamics is implemented for the hydrogen 1s electron")
    return state.electron.bohr_radius


class CumulantTable:
    """Precomputed radial data for K2 at fixed phi, T and electron density."""

    def __init__(self, phi, thermal: ThermalParams, a_b: float = CONSTANTS.a_B,
                 quad: IntegratorConfig | None = None):
        self.phi = phi
        self.thermal = thermal
        self.a_b = a_b
        self.quad = quad or IntegratorConfig(rel_tol=1e-10)
        self.a = 0.0 if phi.empty else shielding_reduced(phi, thermal, a_b, self.quad).a_value
        # integration-by-parts bound on the oscillatory remainder:
        # |int f sin(c k t) dk| <= (2 max|f| + TV(f)) / (c t) on each band
        self._bound = 0.0
        for lo, hi, _ in phi.bands:
            kk = np.linspace(lo, hi, 257)
            f = self._remainder_weight(kk)
            self._bound += 2.0 * np.max(np.abs(f)) + np.sum(np.abs(np.diff(f)))

    def weight(self, k):
        """W(k): spectral weight of the shielding, int W dk = a."""
        return CONSTANTS.c_shield * shielding_integrand(k, self.phi, self.thermal, self.a_b)

    def _remainder_weight(self, k):
        # W(k) / omega_k; W is O(k^2) near 0 so the ratio vanishes there
        k = np.asarray(k, dtype=float)
        ks = np.where(k > 0.0, k, 1.0)
        return np.where(k > 0.0, self.weight(ks) / (_C * ks), 0.0)

    def oscillatory(self, t: float) -> float:
        """int W(k) sin(omega_k t) / omega_k dk."""
        if t == 0.0:
            return 0.0
        total = 0.0
        for lo, hi, _ in self.phi.bands:
            val, _err = _spi.quad(lambda k: float(self._remainder_weight(k)), lo, hi,
                                  weight="sin", wvar=_C * t, limit=200,
                                  epsabs=0.0, epsrel=self.quad.rel_tol)
            total += val
        return total

    def lambda_integral(self, t: float, nu0: float) -> float:
        """int W Lambda_k(t) dk = a t - oscillatory(t)."""
        secular = self.a * t
        if t > 0.0 and abs(nu0) * self._bound / (_C * t) < 1e-17 * max(1.0, abs(nu0) * secular):
            return secular
        return secular - self.oscillatory(t)

    def correlation(self, tau: float) -> float:
        """Kernel time correlation C(tau) = int W omega sin(omega tau) dk."""
        total = 0.0
        for lo, hi, _ in self.phi.bands:
            if tau == 0.0:
                continue
            val, _ = _spi.quad(lambda k: float(self.weight(k)) * _C * k, lo, hi,
                               weight="sin", wvar=_C * tau, limit=200, epsabs=0.0,
                               epsrel=self.quad.rel_tol)
            total += val
        return total


def second_order_cumulant(phi, thermal: ThermalParams, state: MolecularState | None,
                          spec: SpinSpec, field_z: float, t: float,
                          quad: IntegratorConfig | None = None, *,
                          table: CumulantTable | None = None) -> complex:
    """K2(t) = -nu0 (1 - i) int dk W(k) (t - sin(omega_k t)/omega_k)."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if phi.empty or t == 0.0:
        return 0j
    table = table or CumulantTable(phi, thermal, _bohr_radius(state), quad)
    nu0 = abs(spec.larmor(field_z))
    lam = table.lambda_integral(t, nu0)
    return complex(-nu0 * lam, nu0 * lam)


def second_order_cumulant_simplex(phi, thermal: ThermalParams, state: MolecularState | None,
                                  spec: SpinSpec, field_z: float, t: float,
                                  quad: IntegratorConfig | None = None) -> complex:
    """Same exponent from the explicit ordered double time integral (small t only)."""
    if phi.empty or t == 0.0:
        return 0j
    quad = quad or IntegratorConfig(rel_tol=1e-9)
    table = CumulantTable(phi, thermal, _bohr_radius(state), quad)
    nu0 = abs(spec.larmor(field_z))
    res = time_ordered_2(lambda t1, t2: table.correlation(t1 - t2), t, quad)
    return complex(-nu0 * res.value, nu0 * res.value)


def decay_params(phi, thermal: ThermalParams, spec: SpinSpec, field_z: float,
                 state: MolecularState | None = None) -> DecayParams:
    """Long-time shift and rate implied by K2: shift = a (ppm 1e6 a), rate = a nu0."""
    a = 0.0 if phi.empty else shielding_reduced(phi, thermal, _bohr_radius(state)).a_value
    return DecayParams(a * 1e6, a * abs(spec.larmor(field_z)), 0.5)


def fid_signal(phi, thermal: ThermalParams, state: MolecularState | None, spec: SpinSpec,
               field_z: float, pulse: PulseSpec | None = None, t_grid=None, *,
               frame: str = "rotating", bare: bool = False,
               quad: IntegratorConfig | None = None) -> SignalSeries:
    """<M+>(t) = A0 u(t) exp(K2(t)) on a uniform time grid.

    ``frame='rotating'`` stores the signal demodulated by nu0 (required for
    second-scale grids at tesla fields); ``frame='lab'`` keeps the carrier.
    ``bare=True`` replaces exp(K2) with 1 + K2.
    """
    pulse = pulse or PulseSpec()
    if t_grid is None:
        raise ValueError("t_grid is required")
    t0, dt, t = _uniform_grid(t_grid)
    amp0 = pulse.initial_amplitude(spec, field_z)
    nu = spec.larmor(field_z)
    nu0 = abs(nu)
    if phi.empty:
        k2 = np.zeros(t.size, dtype=complex)
        a = 0.0
    else:
        table = CumulantTable(phi, thermal, _bohr_radius(state), quad)
        a = table.a
        lam = np.array([table.lambda_integral(float(ti), nu0) for ti in t])
        k2 = nu0 * lam * (-1.0 + 1j)
    if nu < 0:
        k2 = np.conj(k2)  # the shift always moves |frequency| down
    envelope = 1.0 + k2 if bare else np.exp(k2)
    if frame == "rotating":
        samples = amp0 * envelope
    elif frame == "lab":
        samples = amp0 * np.exp(-1j * nu * t) * envelope
    else:
        raise ValueError(f"unknown frame {frame!r}")
    meta = {
        "frame": frame,
        "nu_ref_rad_s": nu,
        "temperature_K": thermal.temperature,
        "field_T": field_z,
        "gamma_rad_s_T": spec.gamma,
        "bands_per_m": [list(b) for b in phi.bands],
        "shielding_a": a,
        "pulse": pulse.mode,
        "resummation": "bare" if bare else "cumulant",
        "terms": list(TERMS),
        "backend": kernels.BACKEND,
    }
    return SignalSeries(t0, dt, samples, frame, nu, meta)


def effective_relax_signal(sigma_ppm: float, t2_in: float, nu0: float, t_grid, *,
                           frame: str = "rotating") -> SignalSeries:
    """Phenomenological FID 0.5 exp(-i (1 - sigma 1e-6) nu0 t) exp(-t / T2)."""
    if not t2_in > 0.0:
        raise ValueError("T2 must be positive")
    t0, dt, t = _uniform_grid(t_grid)
    decay = np.exp(-t / t2_in) if math.isfinite(t2_in) else np.ones_like(t)
    if frame == "rotating":
        samples = 0.5 * np.exp(1j * sigma_ppm * 1e-6 * nu0 * t) * decay
    else:
        samples = 0.5 * np.exp(-1j * (1.0 - sigma_ppm * 1e-6) * nu0 * t) * decay
    meta = {"frame": frame, "nu_ref_rad_s": nu0, "sigma_ppm": sigma_ppm, "T2_s": t2_in,
            "model": "effective"}
    return SignalSeries(t0, dt, samples, frame, nu0, meta)


@dataclass(frozen=True)
class Site:
    position: tuple[float, float, float]
    spec: SpinSpec


def dipole_kernel_zz(site_j: Site, site_i: Site, t: float, t1: float, t2: float, phi,
                     field_z: float, n_nodes: int = 400) -> complex:
    """Direct spin-spin kernel
    J^zz_ji = -gamma_j gamma_i u_j(t) conj(u_j(t1))
              ([B^z(x_i, t2), B^x(x_j, t1)] + i [B^z(x_i, t2), B^y(x_j, t1)]).
    """
    xi = np.asarray(site_i.position, dtype=float)
    xj = np.asarray(site_j.position, dtype=float)
    if np.allclose(xi, xj, rtol=0.0, atol=1e-30):
        raise ValueError("dipole kernel is singular for coincident sites")
    cx = field_commutator("z", xi, t2, "x", xj, t1, phi, n_nodes)
    cy = field_commutator("z", xi, t2, "y", xj, t1, phi, n_nodes)
    nu_j = site_j.spec.larmor(field_z)
    uu = np.exp(-1j * nu_j * t) * np.conj(np.exp(-1j * nu_j * t1))
    return complex(-site_j.spec.gamma * site_i.spec.gamma * uu * (cx + 1j * cy))


__all__ = [
    "PulseSpec",
    "SignalSeries",
    "DecayParams",
    "CumulantTable",
    "second_order_cumulant",
    "second_order_cumulant_simplex",
    "decay_params",
    "fid_signal",
    "effective_relax_signal",
    "Site",
    "dipole_kernel_zz",
]
