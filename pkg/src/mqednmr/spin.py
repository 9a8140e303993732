"""Spin-1/2 operators, free Larmor evolution and single-spin KMS states.

The free Hamiltonian of one spin is H = -gamma B I^z. For an electron the
Zeeman term +g_s mu_B/hbar S.B is written the same way with gamma = -g_s mu_B/hbar.
Closed-form correlators are the production path; the dense 2x2 routines
(`evolve_matrix`, `kms_trace`) exist to check them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.special import expit

from .constants import CONSTANTS

HBAR = CONSTANTS.hbar

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)

LABELS = ("Ix", "Iy", "Iz", "Iplus", "Iminus", "identity")


@dataclass(frozen=True)
class SpinSpec:
    gamma: float
    kind: str = "nucleus"

    def __post_init__(self):
        if self.gamma == 0.0:
            raise ValueError("gyromagnetic ratio must be non-zero")
        if self.kind not in ("nucleus", "electron"):
            raise ValueError(f"unknown spin kind {self.kind!r}")

    @property
    def moment_prefactor(self) -> float:
        return CONSTANTS.g_s * CONSTANTS.mu_B / HBAR if self.kind == "electron" else abs(self.gamma)

    @classmethod
    def proton(cls) -> "SpinSpec":
        return cls(CONSTANTS.gamma_p, "nucleus")

    @classmethod
    def electron(cls) -> "SpinSpec":
        return cls(-CONSTANTS.electron_gamma, "electron")

    def larmor(self, field_z: float) -> float:
        """Signed precession frequency gamma*B (rad/s); I+ evolves as exp(-i gamma B t)."""
        return self.gamma * field_z


def operator(label: str) -> np.ndarray:
    """Matrix of a spin-1/2 operator in units of J s (hbar included)."""
    mats = {
        "Ix": 0.5 * HBAR * _SX,
        "Iy": 0.5 * HBAR * _SY,
        "Iz": 0.5 * HBAR * _SZ,
        "Iplus": HBAR * np.array([[0, 1], [0, 0]], dtype=complex),
        "Iminus": HBAR * np.array([[0, 0], [1, 0]], dtype=complex),
        "identity": np.eye(2, dtype=complex),
    }
    try:
        return mats[label].copy()
    except KeyError:
        raise ValueError(f"unknown spin operator {label!r}") from None


@dataclass(frozen=True)
class SpinKmsState:
    beta: float
    field_z: float
    spec: SpinSpec
    density: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.beta >= 0.0:
            raise ValueError("beta must be non-negative")
        p_up, p_dn = self.populations
        object.__setattr__(self, "density", np.diag([p_up, p_dn]).astype(complex))

    @property
    def polarization_argument(self) -> float:
        """beta*gamma*hbar*B, the Zeeman energy over kT."""
        return self.beta * self.spec.gamma * HBAR * self.field_z

    @property
    def populations(self) -> tuple[float, float]:
        # logistic form; 1 - p_up would cancel when |y| is large
        y = self.polarization_argument
        return float(expit(y)), float(expit(-y))


def free_evolve(op, t_complex, spec: SpinSpec, field_z: float) -> np.ndarray:
    """Heisenberg-evolved operator tau_t(op) for real or complex t.

    Closed form: I+ -> u(t) I+, I- -> u(t)^-1 I-, I^z fixed, with
    u(t) = exp(-i gamma B t).
    """
    if isinstance(op, str):
        m = operator(op)
    else:
        m = np.asarray(op, dtype=complex)
    u = np.exp(-1j * spec.larmor(field_z) * complex(t_complex))
    # split into I+ / I- / diagonal parts
    out = np.array(m, dtype=complex)
    out[0, 1] = m[0, 1] * u
    out[1, 0] = m[1, 0] / u
    return out


def evolve_matrix(op, t_complex, spec: SpinSpec, field_z: float) -> np.ndarray:
    """Dense oracle for :func:`free_evolve` through expm of the 2x2 Hamiltonian."""
    m = operator(op) if isinstance(op, str) else np.asarray(op, dtype=complex)
    h = -spec.gamma * field_z * operator("Iz")
    t = complex(t_complex)
    left = expm(1j * t * h / HBAR)
    right = expm(-1j * t * h / HBAR)
    return left @ m @ right


def kms_trace(op_matrix, state: SpinKmsState) -> complex:
    """Dense oracle: Tr(rho_beta A), with rho_beta built from expm(-beta H)."""
    h = -state.spec.gamma * state.field_z * operator("Iz")
    w = expm(-state.beta * h)
    rho = w / np.trace(w)
    return complex(np.trace(rho @ np.asarray(op_matrix, dtype=complex)))


def kms_expectation(ops, state: SpinKmsState) -> complex:
    """omega_beta of a product of (already evolved) operators on one spin.

    ``ops`` is a matrix or a sequence of matrices / labels for one site.
    """
    if isinstance(ops, (str, np.ndarray)):
        ops = [ops]
    prod = np.eye(2, dtype=complex)
    for o in ops:
        m = operator(o) if isinstance(o, str) else np.asarray(o, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("operators must act on the same spin-1/2 site")
        prod = prod @ m
    return complex(np.sum(np.diag(state.density) * np.diag(prod)))


# ladder-operator coefficients: op = c_plus I+ + c_minus I- + c_z Iz
_LADDER = {
    "Ix": (0.5, 0.5, 0.0),
    "Iy": (-0.5j, 0.5j, 0.0),
    "Iz": (0.0, 0.0, 1.0),
    "Iplus": (1.0, 0.0, 0.0),
    "Iminus": (0.0, 1.0, 0.0),
}


def correlation(a: str, b: str, z, state: SpinKmsState) -> complex:
    """Closed form of omega_beta(A tau_z(B)) for A, B in {Ix, Iy, Iz, Iplus, Iminus}.

    With populations p_up, p_down and nu = gamma B:
    omega(I+ tau_z(I-)) = hbar^2 p_up e^{i nu z},
    omega(I- tau_z(I+)) = hbar^2 p_down e^{-i nu z},
    omega(Iz tau_z(Iz)) = hbar^2 / 4, and all mixed terms vanish.
    """
    try:
        ap, am, az = _LADDER[a]
        bp, bm, bz = _LADDER[b]
    except KeyError as exc:
        raise ValueError(f"unsupported operator {exc.args[0]!r}") from None
    p_up, p_dn = state.populations
    nu = state.spec.larmor(state.field_z)
    z = complex(z)
    return (ap * bm * HBAR**2 * p_up * np.exp(1j * nu * z)
            + am * bp * HBAR**2 * p_dn * np.exp(-1j * nu * z)
            + az * bz * HBAR**2 / 4.0)


def expectation_z(state: SpinKmsState) -> float:
    """omega_beta(I^z) = (hbar/2) tanh(beta gamma hbar B / 2)."""
    return 0.5 * HBAR * math.tanh(0.5 * state.polarization_argument)


def high_temperature_Iz(state: SpinKmsState) -> float:
    """Leading high-temperature form hbar^2 beta gamma B / 4 of omega_beta(I^z)."""
    y = state.polarization_argument
    if abs(y) > 0.1:
        warnings.warn(f"high-temperature form used at beta*gamma*hbar*B = {y:.3g}",
                      RuntimeWarning, stacklevel=2)
    return HBAR**2 * state.beta * state.spec.gamma * state.field_z / 4.0


def u(t, spec: SpinSpec, field_z: float):
    """Free precession phase u(t) = exp(-i gamma B t)."""
    return np.exp(-1j * spec.larmor(field_z) * np.asarray(t))


__all__ = [
    "HBAR",
    "LABELS",
    "SpinSpec",
    "SpinKmsState",
    "operator",
    "free_evolve",
    "evolve_matrix",
    "kms_trace",
    "kms_expectation",
    "correlation",
    "expectation_z",
    "high_temperature_Iz",
    "u",
]
