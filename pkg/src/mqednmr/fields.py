"""Photon-field objects: coupling functions, polarisation frames, mode functions,
thermal occupation, the magnetic exchange kernel and the commutator function.

Positions are in m, wavenumbers in 1/m (angular, omega = c|k|), complex times
in s. A complex time ``t + 1j*tau`` carries the imaginary-time coordinate in
seconds; the thermal strip is 0 <= tau <= beta*hbar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import CONSTANTS, ThermalParams

_C = CONSTANTS.c
_HBAR = CONSTANTS.hbar
# sqrt(hbar / (eps0 (2 pi)^3)), prefactor of the magnetic mode functions
MODE_PREFACTOR = math.sqrt(_HBAR / (CONSTANTS.epsilon_0 * (2.0 * math.pi) ** 3))
_AXES = {"x": 0, "y": 1, "z": 2, 0: 0, 1: 1, 2: 2}


def axis_index(alpha) -> int:
    try:
        return _AXES[alpha]
    except KeyError:
        raise ValueError(f"unknown Cartesian axis {alpha!r}") from None


@dataclass(frozen=True)
class CouplingFunction:
    """Rectangular radial coupling phi(k) = g on [delta_ir, delta_uv], 0 elsewhere.

    ``g`` is fixed by the normalisation g * (delta_uv - delta_ir) = 1.
    """

    delta_ir: float
    delta_uv: float

    def __post_init__(self):
        if not (self.delta_ir >= 0.0 and self.delta_uv > self.delta_ir):
            raise ValueError(
                f"need 0 <= delta_ir < delta_uv, got ({self.delta_ir}, {self.delta_uv})")

    @property
    def g(self) -> float:
        return 1.0 / (self.delta_uv - self.delta_ir)

    @property
    def bands(self) -> tuple[tuple[float, float, float], ...]:
        return ((self.delta_ir, self.delta_uv, self.g),)

    @property
    def empty(self) -> bool:
        return False

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return np.where((k >= self.delta_ir) & (k <= self.delta_uv), self.g, 0.0)

    def scaled(self, factor: float) -> "CouplingFunction":
        return CouplingFunction(self.delta_ir * factor, self.delta_uv * factor)


@dataclass(frozen=True)
class BandCoupling:
    """Finite sum of disjoint rectangles, phi(k) = g_i on [lo_i, hi_i].

    An instance with no bands is the coupling with empty support.
    """

    parts: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        ordered = sorted(self.parts)
        for lo, hi, g in ordered:
            if not (lo >= 0.0 and hi > lo and g > 0.0):
                raise ValueError(f"invalid band ({lo}, {hi}, {g})")
        for (_, hi, _), (lo, _, _) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise ValueError("bands must be disjoint")
        object.__setattr__(self, "parts", tuple(ordered))

    @property
    def bands(self):
        return self.parts

    @property
    def empty(self) -> bool:
        return not self.parts

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        out = np.zeros_like(k)
        for lo, hi, g in self.parts:
            out = np.where((k >= lo) & (k <= hi), g, out)
        return out


def support(phi) -> list[tuple[float, float]]:
    return [(lo, hi) for lo, hi, _ in phi.bands]


@dataclass(frozen=True)
class PolarizationBasis:
    eps1: np.ndarray
    eps2: np.ndarray
    khat: np.ndarray

    def vectors(self):
        return (self.eps1, self.eps2)

    def rotated(self, angle: float) -> "PolarizationBasis":
        """Same frame rotated by ``angle`` about khat."""
        c, s = math.cos(angle), math.sin(angle)
        return PolarizationBasis(c * self.eps1 + s * self.eps2,
                                 -s * self.eps1 + c * self.eps2, self.khat)


def polarization_basis(k) -> PolarizationBasis:
    """Deterministic transverse frame for ``k``.

    eps1 comes from Gram-Schmidt on the Cartesian axis along which khat has its
    smallest component (lowest index on ties); eps2 = khat x eps1.
    """
    k = np.asarray(k, dtype=float)
    norm = np.linalg.norm(k)
    if norm == 0.0:
        raise ValueError("polarization basis undefined for k = 0")
    khat = k / norm
    axis = int(np.argmin(np.abs(khat)))
    e = np.zeros(3)
    e[axis] = 1.0
    eps1 = e - np.dot(e, khat) * khat
    eps1 /= np.linalg.norm(eps1)
    eps2 = np.cross(khat, eps1)
    return PolarizationBasis(eps1, eps2, khat)


def planck_occupation(k, thermal: ThermalParams):
    """Bose-Einstein occupation 1/(exp(beta hbar c k) - 1) for angular wavenumber k."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0):
        raise ValueError("occupation diverges at k = 0; need k > 0")
    x = thermal.x_per_wavenumber * k
    with np.errstate(over="ignore"):  # expm1 -> inf gives the correct limit 0
        out = 1.0 / np.expm1(x)
    return float(out) if out.ndim == 0 else out


def _complex_time(t) -> complex:
    return complex(t)


def _check_strip(z: complex, thermal: ThermalParams | None):
    if z.real < 0.0:
        raise ValueError(f"complex time {z} has negative real part")
    if z.imag < 0.0:
        raise ValueError(f"complex time {z} has negative imaginary part")
    if thermal is not None and z.imag > thermal.beta * _HBAR * (1.0 + 1e-12):
        raise ValueError(f"imaginary part of {z} exceeds beta*hbar")


def mode_function(alpha, x, t_complex, k, lam: int, phi, basis: PolarizationBasis | None = None):
    """Magnetic mode function b^{alpha x}_{phi lambda}(k) at complex time.

    i sqrt(hbar/(eps0 (2pi)^3)) (k x eps_lambda)^alpha phi(|k|)/sqrt(omega)
    * exp(-i (k.x - omega t)).
    """
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise ValueError("mode function undefined at k = 0")
    a = axis_index(alpha)
    if lam not in (1, 2):
        raise ValueError("polarization index must be 1 or 2")
    t = _complex_time(t_complex)
    basis = basis or polarization_basis(k)
    eps = basis.eps1 if lam == 1 else basis.eps2
    amp = float(phi(kn))
    if amp == 0.0:
        return 0j
    omega = _C * kn
    cross = np.cross(k, eps)[a]
    phase = np.exp(-1j * (np.dot(k, np.asarray(x, dtype=float)) - omega * t))
    return 1j * MODE_PREFACTOR * cross * amp / math.sqrt(omega) * phase


def exchange_kernel(alpha, gamma, x, y, z1, z2, k, phi, thermal: ThermalParams,
                    basis: PolarizationBasis | None = None) -> complex:
    """Magnetic quantum exchange m^{alpha gamma}_{phi beta}(x, z2, y, z1, k).

    Four-term sum over both polarisations of conjugated mode-function products
    weighted by (1 + rho) and rho. Conjugation is literal, also at complex time.
    """
    z1, z2 = _complex_time(z1), _complex_time(z2)
    _check_strip(z1, thermal)
    _check_strip(z2, thermal)
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise ValueError("exchange kernel undefined at k = 0")
    if float(phi(kn)) == 0.0:
        return 0j
    rho = planck_occupation(kn, thermal)
    basis = basis or polarization_basis(k)
    total = 0j
    for lam in (1, 2):
        ax2 = mode_function(alpha, x, z2, k, lam, phi, basis)
        gy1 = mode_function(gamma, y, z1, k, lam, phi, basis)
        gy2 = mode_function(gamma, y, z2, k, lam, phi, basis)
        ax1 = mode_function(alpha, x, z1, k, lam, phi, basis)
        total += (np.conj(ax2) * gy1 * (1.0 + rho) + np.conj(gy1) * ax2 * rho
                  + np.conj(gy2) * ax1 * (1.0 + rho) + np.conj(ax1) * gy2 * rho)
    return complex(total)


def exchange_kernel_closed(alpha, gamma, x, y, z1, z2, k, phi, thermal: ThermalParams):
    """Polarisation-summed closed form of :func:`exchange_kernel` (vectorised in k).

    C^2 (|k|^2 delta - k_a k_g) phi^2/omega * 2 cos(k.(x-y))
    * [(1+rho) e^{i omega (z1 - conj z2)} + rho e^{i omega (z2 - conj z1)}].
    """
    a, g = axis_index(alpha), axis_index(gamma)
    k = np.atleast_2d(np.asarray(k, dtype=float))
    kn = np.linalg.norm(k, axis=1)
    omega = _C * kn
    rho = 1.0 / np.expm1(thermal.x_per_wavenumber * kn)
    pol = kn**2 * (a == g) - k[:, a] * k[:, g]
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    z1, z2 = complex(z1), complex(z2)
    phase = ((1.0 + rho) * np.exp(1j * omega * (z1 - np.conj(z2)))
             + rho * np.exp(1j * omega * (z2 - np.conj(z1))))
    out = MODE_PREFACTOR**2 * pol * phi(kn) ** 2 / omega * 2.0 * np.cos(k @ d) * phase
    return out


def commutator_propagator(k, delta) -> complex:
    """Commutator function i Delta_k(x - y) for a spacetime difference (dx, dy, dz, dt).

    (exp(-i k.Delta) - exp(i k.Delta)) / ((2 pi)^3 2 omega), with
    k.Delta = k.dx - omega dt.
    """
    k = np.asarray(k, dtype=float)
    kn = float(np.linalg.norm(k))
    if kn == 0.0:
        raise ValueError("commutator function undefined at k = 0")
    delta = np.asarray(delta, dtype=float)
    omega = _C * kn
    kd = float(np.dot(k, delta[:3]) - omega * delta[3])
    return complex(-2j * math.sin(kd) / ((2.0 * math.pi) ** 3 * 2.0 * omega))


def _j1_over_x(x):
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    xs = np.where(small, 1.0, x)
    big = (np.sin(xs) / xs**2 - np.cos(xs) / xs) / xs
    return np.where(small, 1.0 / 3.0 - x**2 / 30.0, big)


def _j2(x):
    x = np.asarray(x, dtype=float)
    small = x < 1e-2
    xs = np.where(small, 1.0, x)
    big = (3.0 / xs**2 - 1.0) * np.sin(xs) / xs - 3.0 * np.cos(xs) / xs**2
    return np.where(small, x**2 / 15.0 - x**4 / 210.0, big)


def field_commutator(alpha, x, t, gamma, y, s, phi, n_nodes: int = 400) -> complex:
    """[B^alpha(x, t), B^gamma(y, s)] as a c-number, for radial phi.

    The angular k-integral is done analytically with
    int dOmega khat_i khat_j exp(i k.r) = 4 pi (delta_ij j1(kr)/(kr) - rhat_i rhat_j j2(kr)),
    leaving a radial Gauss-Legendre integral on each band of phi.
    """
    a, g = axis_index(alpha), axis_index(gamma)
    r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    tau = float(t) - float(s)
    rn = float(np.linalg.norm(r))
    rhat = r / rn if rn > 0 else np.zeros(3)
    delta = 1.0 if a == g else 0.0
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    total = 0.0
    for lo, hi, amp in phi.bands:
        kk = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        ww = 0.5 * (hi - lo) * weights
        kr = kk * rn
        # int dOmega (delta_ag - khat_a khat_g) sin(k.r - omega tau); the
        # odd part sin(k.r) cos(omega tau) integrates to zero.
        ang_even = 4.0 * math.pi * delta * np.sinc(kr / math.pi) - 4.0 * math.pi * (
            delta * _j1_over_x(kr) - rhat[a] * rhat[g] * _j2(kr))
        omega = _C * kk
        integrand = (CONSTANTS.hbar / CONSTANTS.epsilon_0) * amp**2 * kk**4 * (
            -np.sin(omega * tau)) * ang_even / ((2.0 * math.pi) ** 3 * 2.0 * omega)
        total += float(np.sum(ww * integrand))
    # -int phi^a phi^g i Delta_k with i Delta_k = -2i sin(k.r - omega tau)/((2pi)^3 2 omega)
    return complex(2j * total)


__all__ = [
    "MODE_PREFACTOR",
    "axis_index",
    "CouplingFunction",
    "BandCoupling",
    "support",
    "PolarizationBasis",
    "polarization_basis",
    "planck_occupation",
    "mode_function",
    "exchange_kernel",
    "exchange_kernel_closed",
    "commutator_propagator",
    "field_commutator",
]
