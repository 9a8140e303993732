"""Physical constants, thermal parameters and unit conversions.

Everything inside the package is SI. Angstrom, mm^-1 and Mm^-1 only appear
at the interface (CLI, presets, tables) and are converted here.

Constants are CODATA 2018.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.054571817e-34  # J s
    c: float = 299792458.0  # m/s
    mu_B: float = 9.2740100783e-24  # J/T
    mu_0: float = 1.25663706212e-6  # T m / A
    k_B: float = 1.380649e-23  # J/K
    g_s: float = 2.00231930436256
    a_B: float = 5.29177210903e-11  # m
    gamma_p: float = 2.6752218744e8  # rad/(s T)
    e: float = 1.602176634e-19  # C

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def epsilon_0(self) -> float:
        return 1.0 / (self.mu_0 * self.c**2)

    @property
    def c_shield(self) -> float:
        """Shielding prefactor in Angstrom^2, used as a pure number.

        Evaluated as g_s^2 mu_B^2 mu_0 / (6 pi hbar c); this is the constant
        that reproduces 7.271326950237399e-8 A^2.
        """
        si = self.g_s**2 * self.mu_B**2 * self.mu_0 / (6.0 * math.pi * self.hbar * self.c)
        return si * 1e20

    @property
    def electron_gamma(self) -> float:
        """Magnitude of the electron spin gyromagnetic ratio g_s mu_B / hbar."""
        return self.g_s * self.mu_B / self.hbar


CONSTANTS = PhysicalConstants()

C_SHIELD_LITERAL = 7.271326950237399e-8  # Angstrom^2


@dataclass(frozen=True)
class ThermalParams:
    temperature: float
    beta: float = field(init=False)

    def __post_init__(self):
        if not (self.temperature > 0.0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be positive and finite, got {self.temperature}")
        object.__setattr__(self, "beta", 1.0 / (CONSTANTS.k_B * self.temperature))

    @property
    def x_per_wavenumber(self) -> float:
        """beta*hbar*c: the thermal ratio hbar*omega/kT per unit angular wavenumber (m)."""
        return self.beta * CONSTANTS.hbar * CONSTANTS.c


# --- wavenumber units --------------------------------------------------------

PER_M = 1.0
PER_MM = 1e3
PER_MEGAMETER = 1e-6
ANGSTROM = 1e-10


def mm_inv_to_si(k):
    return np.asarray(k, dtype=float) * PER_MM if np.ndim(k) else float(k) * PER_MM


def si_to_mm_inv(k):
    return np.asarray(k, dtype=float) / PER_MM if np.ndim(k) else float(k) / PER_MM


def megameter_inv_to_si(k):
    return np.asarray(k, dtype=float) * PER_MEGAMETER if np.ndim(k) else float(k) * PER_MEGAMETER


def si_to_megameter_inv(k):
    return np.asarray(k, dtype=float) / PER_MEGAMETER if np.ndim(k) else float(k) / PER_MEGAMETER


def wavenumber_to_energy(k_mm_inv: float) -> float:
    """Photon energy in eV for a spectroscopic wavenumber given in mm^-1.

    Uses E = h c k, so 1 mm^-1 is about 0.00124 eV.
    """
    k = float(k_mm_inv)
    if k < 0.0 or not math.isfinite(k):
        raise ValueError(f"wavenumber must be non-negative and finite, got {k}")
    return CONSTANTS.h * CONSTANTS.c * (k * PER_MM) / CONSTANTS.e


def ppm_axis(nu, nu0):
    """Offset of ``nu`` from the Larmor frequency ``nu0`` in parts per million."""
    nu0 = float(nu0)
    if nu0 == 0.0:
        raise ValueError("reference frequency nu0 must be non-zero")
    if nu0 < 0.0:
        raise ValueError("reference frequency nu0 must be positive")
    return (np.asarray(nu, dtype=float) - nu0) / nu0 * 1e6


def larmor_frequency(gamma: float, field_z: float) -> float:
    """Angular Larmor frequency gamma*|B| in rad/s."""
    return abs(gamma * field_z)


__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "C_SHIELD_LITERAL",
    "ThermalParams",
    "PER_MM",
    "PER_MEGAMETER",
    "ANGSTROM",
    "mm_inv_to_si",
    "si_to_mm_inv",
    "megameter_inv_to_si",
    "si_to_megameter_inv",
    "wavenumber_to_energy",
    "ppm_axis",
    "larmor_frequency",
]
