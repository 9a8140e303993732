"""Molecular expectation functional: nuclear densities, the hydrogen 1s electron
density and classical Gibbs densities over a rotor angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .constants import CONSTANTS
from .integrate import Dimension, IntegratorConfig, mc_integrate

NORM_TOL = 1e-9


@dataclass(frozen=True)
class GaussianDensity:
    """Isotropic Gaussian |Psi|^2 for one nucleus (center in m, width = std in m)."""

    center: tuple[float, float, float] = (0.0, 0.0, 0.0)
    width: float = 1e-11

    kind = "analytic-gaussian"

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("gaussian width must be positive")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.center) + self.width * rng.standard_normal((n, 3))

    def positions_from_uniform(self, u: np.ndarray) -> np.ndarray:
        from scipy.special import ndtri
        z = ndtri(np.clip(u, 1e-300, 1 - 1e-16))
        return np.asarray(self.center) + self.width * z


@dataclass(frozen=True)
class GridDensity:
    """Explicit configurations X (shape (n, 3K)) with probability weights."""

    points: np.ndarray
    weights: np.ndarray

    kind = "grid"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        _check_weights(w)
        if pts.shape[0] != w.size:
            raise ValueError("need one weight per grid point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def positions_from_uniform(self, u: np.ndarray) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        idx = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), cdf.size - 1)
        return self.points[idx, :3]


@dataclass(frozen=True)
class AngularDensity:
    """Weights over a uniform rotor-angle grid on [0, 2 pi)."""

    theta: np.ndarray
    weights: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    kind = "angular"

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if th.shape != w.shape or th.ndim != 1:
            raise ValueError("theta and weights must be 1D arrays of equal length")
        if np.any(th < 0.0) or np.any(th >= 2.0 * math.pi):
            raise ValueError("theta grid must lie in [0, 2 pi)")
        _check_weights(w)
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> "AngularDensity":
        th = 2.0 * math.pi * np.arange(n) / n
        return cls(th, np.full(n, 1.0 / n))

    @classmethod
    def delta(cls, n: int, index: int) -> "AngularDensity":
        w = np.zeros(n)
        w[index] = 1.0
        return cls(2.0 * math.pi * np.arange(n) / n, w)

    def entropy(self) -> float:
        w = self.weights[self.weights > 0]
        return float(-np.sum(w * np.log(w)))


def _check_weights(w):
    if np.any(~np.isfinite(w)) or np.any(w < 0.0):
        raise ValueError("density weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > NORM_TOL:
        raise ValueError(f"density weights sum to {w.sum():.12g}, not 1")


def total_variation(p: AngularDensity | np.ndarray, q: AngularDensity | np.ndarray) -> float:
    pw = p.weights if hasattr(p, "weights") else np.asarray(p)
    qw = q.weights if hasattr(q, "weights") else np.asarray(q)
    return 0.5 * float(np.sum(np.abs(pw - qw)))


@dataclass(frozen=True)
class ElectronDensity1s:
    """Hydrogen 1s density |psi_100|^2 = exp(-2r/a_B) / (pi a_B^3) about the nucleus."""

    bohr_radius: float = CONSTANTS.a_B

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-2.0 * r / self.bohr_radius) / (math.pi * self.bohr_radius**3)

    def form_factor(self, k):
        """Fourier transform of the density, 1/(1 + k^2 a_B^2 / 4)^2."""
        k = np.asarray(k, dtype=float)
        return 1.0 / (1.0 + 0.25 * (k * self.bohr_radius) ** 2) ** 2

    def mean_radius(self) -> float:
        return 1.5 * self.bohr_radius


@dataclass(frozen=True)
class MolecularState:
    nuclear: GaussianDensity | GridDensity | AngularDensity
    electron: ElectronDensity1s | Callable = field(default_factory=ElectronDensity1s)
    temperature: float = 293.0


def molecular_expectation(f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                          state: MolecularState, integrator: IntegratorConfig):
    """Monte Carlo estimate of int |Psi(X)|^2 |psi(X, X^e)|^2 f(X, X^e).

    One nucleus (first three coordinates of X) and one 1s electron; the
    electron is drawn by the exact radial inverse CDF around the nucleus.
    ``f`` takes arrays of shape (n, 3) for X and X^e.
    """
    nuc = state.nuclear
    if isinstance(nuc, AngularDensity):
        raise ValueError("angular densities carry no Cartesian coordinates")
    if not isinstance(state.electron, ElectronDensity1s):
        raise ValueError("molecular_expectation needs a 1s electron density")
    a_b = state.electron.bohr_radius
    domain = [Dimension("uniform", 0.0, 1.0), Dimension("uniform", 0.0, 1.0),
              Dimension("uniform", 0.0, 1.0), Dimension("radial-1s", scale=a_b)]

    def integrand(u1, u2, u3, r):
        X = nuc.positions_from_uniform(np.stack([u1, u2, u3], axis=1))
        return f(X, X + r)

    return mc_integrate(integrand, domain, integrator)


def gibbs_density(energy_curve: Callable[[np.ndarray], np.ndarray], temperature: float,
                  grid_size: int = 64) -> AngularDensity:
    """Classical Gibbs weights exp(-E(theta)/kT) on a uniform theta grid."""
    if grid_size < 8:
        raise ValueError("grid_size must be at least 8")
    if not temperature >= 0.0:
        raise ValueError("temperature must be non-negative")
    theta = 2.0 * math.pi * np.arange(grid_size) / grid_size
    e = np.asarray(energy_curve(theta), dtype=float)
    if e.shape != theta.shape or np.any(~np.isfinite(e)):
        raise ValueError("energy curve must be finite on the theta grid")
    e = e - e.min()
    if temperature == 0.0:
        w = (e == 0.0).astype(float)
    else:
        w = np.exp(-e / (CONSTANTS.k_B * temperature))
    w /= w.sum()
    return AngularDensity(theta, w, {"temperature_K": temperature})


def interpolated_curve(theta_table, energy_table) -> Callable[[np.ndarray], np.ndarray]:
    """Periodic linear interpolation of a tabulated PES over theta."""
    th = np.asarray(theta_table, dtype=float)
    e = np.asarray(energy_table, dtype=float)
    order = np.argsort(th)

    def curve(theta):
        return np.interp(theta, th[order], e[order], period=2.0 * math.pi)

    curve.interpolation = "linear"
    return curve


def cosine_rotor(barrier: float, fold: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    """E(theta) = barrier (1 - cos(fold theta)) / 2, in J."""
    return lambda theta: 0.5 * barrier * (1.0 - np.cos(fold * np.asarray(theta)))


def double_well(barrier: float, asymmetry: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """Minima at theta = 0 and pi; ``asymmetry`` raises the well at pi (J)."""
    def curve(theta):
        theta = np.asarray(theta)
        return 0.5 * barrier * (1.0 - np.cos(2.0 * theta)) + 0.5 * asymmetry * (1.0 - np.cos(theta))
    return curve


# --- plain-text tables ---------------------------------------------------------


def save_density(path, density) -> None:
    path = Path(path)
    if isinstance(density, AngularDensity):
        header = "# representation = angular\ntheta_rad,weight\n"
        rows = np.column_stack([density.theta, density.weights])
    elif isinstance(density, GridDensity):
        ncol = density.points.shape[1]
        cols = ",".join(f"X{i}_m" for i in range(ncol))
        header = f"# representation = grid\n{cols},weight\n"
        rows = np.column_stack([density.points, density.weights])
    elif isinstance(density, GaussianDensity):
        header = "# representation = analytic-gaussian\ncx_m,cy_m,cz_m,width_m\n"
        rows = np.array([[*density.center, density.width]])
    else:
        raise TypeError(f"cannot save {type(density).__name__}")
    with open(path, "w") as fh:
        fh.write(header)
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_density(path):
    lines = Path(path).read_text().splitlines()
    rep = None
    body = []
    for n, line in enumerate(lines, start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if "representation" in s:
                rep = s.split("=", 1)[1].strip()
            continue
        if body == [] and not _is_numeric_row(s):
            continue  # column header
        try:
            body.append([float(v) for v in s.split(",")])
        except ValueError:
            raise ValueError(f"{path}:{n}: cannot parse row {s!r}") from None
    data = np.array(body)
    if rep == "angular":
        return AngularDensity(data[:, 0], data[:, 1])
    if rep == "grid":
        return GridDensity(data[:, :-1], data[:, -1])
    if rep == "analytic-gaussian":
        return GaussianDensity(tuple(data[0, :3]), float(data[0, 3]))
    raise ValueError(f"{path}: missing or unknown representation header")


def _is_numeric_row(s: str) -> bool:
    try:
        [float(v) for v in s.split(",")]
        return True
    except ValueError:
        return False


__all__ = [
    "GaussianDensity",
    "GridDensity",
    "AngularDensity",
    "ElectronDensity1s",
    "MolecularState",
    "total_variation",
    "molecular_expectation",
    "gibbs_density",
    "interpolated_curve",
    "cosine_rotor",
    "double_well",
    "save_density",
    "load_density",
]
