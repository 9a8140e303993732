"""Second-order thermal magnetic shielding of a hydrogen nucleus.

Two routes to the same number:

* ``shielding_reduced``: the radial integral
  a = C_shield * int dk |phi(k)|^2 h(beta hbar c k) k / (1 + k^2 a_B^2/4)^2 with
  h(x) = (e^{-2x}/2 - e^{-x} + 1/2)(1 + 2 rho) = (1 - e^{-2x}) / 2.
* ``shielding_full``: Monte Carlo over imaginary times, nuclear and electron
  positions and photon momentum of the zz exchange kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import CONSTANTS, ThermalParams
from .fields import MODE_PREFACTOR
from .integrate import Dimension, IntegratorConfig, mc_integrate, quad_1d
from .molecular import AngularDensity, ElectronDensity1s, MolecularState
from .spin import HBAR, SpinKmsState, SpinSpec, expectation_z

# Angular, spatial and imaginary-time integrals of m^zz collapse the full
# integral to REDUCTION * int dk k |phi|^2 h(x) F(k).
REDUCTION = 16.0 * math.pi * MODE_PREFACTOR**2 / (3.0 * HBAR**2 * CONSTANTS.c**3)


@dataclass
class ShieldingResult:
    a_value: float
    method: str
    error_estimate: float
    params: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    @property
    def ppm(self) -> float:
        return self.a_value * 1e6

    @property
    def error_ppm(self) -> float:
        return self.error_estimate * 1e6


def thermal_factor(x):
    """(e^{-2x}/2 - e^{-x} + 1/2)(1 + 2/(e^x - 1)), evaluated as -expm1(-2x)/2."""
    return -0.5 * np.expm1(-2.0 * np.asarray(x, dtype=float))


def shielding_integrand(k, phi, thermal: ThermalParams, a_b: float):
    """Integrand of the radial form, without the C_shield prefactor."""
    k = np.asarray(k, dtype=float)
    ff = 1.0 / (1.0 + 0.25 * (k * a_b) ** 2) ** 2
    return phi(k) ** 2 * thermal_factor(thermal.x_per_wavenumber * k) * k * ff


def _params(phi, thermal, a_b):
    return {
        "bands_per_m": [list(b) for b in phi.bands],
        "temperature_K": thermal.temperature,
        "a_B_m": a_b,
    }


def shielding_reduced(phi, thermal: ThermalParams, a_b: float = CONSTANTS.a_B,
                      quad: IntegratorConfig | None = None) -> ShieldingResult:
    quad = quad or IntegratorConfig(rel_tol=1e-10)
    total, err, flags = 0.0, 0.0, []
    for lo, hi, _ in phi.bands:
        mid = 0.5 * (lo + hi)
        r = quad_1d(lambda k: float(shielding_integrand(k, phi, thermal, a_b)), lo, hi, quad)
        if not np.isfinite(r.value):
            raise FloatingPointError(f"non-finite integrand near k = {mid}")
        total += r.value
        err += r.error
        flags += r.flags
    c = CONSTANTS.c_shield
    return ShieldingResult(c * total, "reduced-1d", c * err, _params(phi, thermal, a_b), flags)


def shielding_zero_temperature(phi, a_b: float = CONSTANTS.a_B) -> float:
    """T -> 0 limit: h -> 1/2, closed form per band.

    int_lo^hi k / u(k)^2 dk = (hi^2 - lo^2) / (2 u(lo) u(hi)) with
    u = 1 + k^2 a^2/4, written without the difference of nearly equal terms.
    """
    total = 0.0
    for lo, hi, g in phi.bands:
        u_lo = 1.0 + 0.25 * (lo * a_b) ** 2
        u_hi = 1.0 + 0.25 * (hi * a_b) ** 2
        total += 0.5 * g**2 * (hi - lo) * (hi + lo) / (2.0 * u_lo * u_hi)
    return CONSTANTS.c_shield * total


def shielding_full(phi, thermal: ThermalParams, state: MolecularState,
                   mc: IntegratorConfig) -> ShieldingResult:
    """Monte Carlo estimate of the shielding from the full zz exchange integral.

    Samples: imaginary times uniform on [0, beta]^2 with the ordered simplex
    selected by an indicator, the nuclear position from ``state.nuclear``, the
    electron from the 1s law around it, and k uniform in each band's shell.
    """
    if isinstance(state.nuclear, AngularDensity):
        raise ValueError("full shielding needs a Cartesian nuclear density")
    if not isinstance(state.electron, ElectronDensity1s):
        raise ValueError("full shielding is implemented for the hydrogen 1s electron")
    params = _params(phi, thermal, state.electron.bohr_radius)
    params.update({"samples": mc.samples, "seed": mc.seed, "batches": mc.batches,
                   "backend": kernels.BACKEND})
    if phi.empty:
        return ShieldingResult(0.0, "full-mc", 0.0, params)
    beta = thermal.beta
    a_b = state.electron.bohr_radius
    nuc = state.nuclear
    prefactor = MODE_PREFACTOR**2 / CONSTANTS.c
    hbar_c = HBAR * CONSTANTS.c
    scale = CONSTANTS.c_shield / REDUCTION

    total, var, flags = 0.0, 0.0, []
    for i, (lo, hi, g) in enumerate(phi.bands):
        domain = [
            Dimension("uniform"), Dimension("uniform"), Dimension("uniform"),
            Dimension("radial-1s", scale=a_b),
            Dimension("shell", lo, hi),
            Dimension("simplex", 0.0, beta),
        ]

        def integrand(u1, u2, u3, r, k, s, g=g):
            X = nuc.positions_from_uniform(np.stack([u1, u2, u3], axis=1))
            xe = X + r
            amp = np.full(k.shape[0], g)
            return kernels.shielding_integrand(k, xe - X, s, amp, prefactor, hbar_c,
                                               thermal.x_per_wavenumber)

        cfg = IntegratorConfig(mode="monte-carlo", seed=mc.seed + 7919 * i, samples=mc.samples,
                               batches=mc.batches, workers=mc.workers)
        est = mc_integrate(integrand, domain, cfg)
        total += est.value
        var += est.error**2
        flags += est.flags
    se = math.sqrt(var) * scale
    if se > 0.1 * abs(total * scale):
        flags.append("wide error bar: increase samples")
    return ShieldingResult(total * scale, "full-mc", se, params, flags)


@dataclass
class EquilibriumIz:
    value: float
    isolated: float
    reduction: float
    reduction_coefficient: float
    mode: str


def reduction_coefficient(a_value: float, nucleus: SpinSpec) -> float:
    """r such that r * omega(S^z) reproduces a * omega(I^z) at high temperature.

    Matching (hbar/2)(beta g_s mu_B B / 2) r = a hbar^2 beta gamma B / 4 gives
    r = a hbar gamma / (g_s mu_B); it does not depend on T or B.
    """
    return a_value * HBAR * abs(nucleus.gamma) / (CONSTANTS.g_s * CONSTANTS.mu_B)


def equilibrium_Iz_mqed(a_value: float, thermal: ThermalParams, spec_nucleus: SpinSpec,
                        spec_electron: SpinSpec, field_z: float, mode: str = "exact") -> EquilibriumIz:
    """Equilibrium <I^z> of a shielded nucleus to second order.

    ``exact``: omega(I^z) - r |omega(S^z)| with both spin expectations in tanh
    form; the reduction is bounded by r hbar/2 however large B is.
    ``approximate``: (hbar^2/4) beta gamma B (1 - a), whose reduction grows
    linearly in B without bound.
    """
    nuc_state = SpinKmsState(thermal.beta, field_z, spec_nucleus)
    el_state = SpinKmsState(thermal.beta, field_z, spec_electron)
    r = reduction_coefficient(a_value, spec_nucleus)
    if mode == "exact":
        iso = expectation_z(nuc_state)
        red = r * abs(expectation_z(el_state))
    elif mode == "approximate":
        iso = HBAR**2 * thermal.beta * spec_nucleus.gamma * field_z / 4.0
        red = a_value * iso
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return EquilibriumIz(iso - red, iso, red, r, mode)


__all__ = [
    "REDUCTION",
    "ShieldingResult",
    "thermal_factor",
    "shielding_integrand",
    "shielding_reduced",
    "shielding_zero_temperature",
    "shielding_full",
    "EquilibriumIz",
    "reduction_coefficient",
    "equilibrium_Iz_mqed",
]
