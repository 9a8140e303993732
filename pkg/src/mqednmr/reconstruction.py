"""Toy-scale reconstruction of an angular nuclear density from a spectrum.

Forward model: every rotor angle theta carries a Lorentzian line with a local
position (ppm) and decay rate. A density over theta mixes these lines; the
mixture is transformed with a fixed truncation so the forward map is exactly
linear in the weights. ``reconstruct`` fits the weights by Nelder-Mead over
low-order Fourier corrections to a Gibbs initial guess, projecting onto the
probability simplex at every evaluation.

``temperature_ladder`` is the separate two-site picture: each nucleus sees the
Gibbs-averaged shift of its own angular density, so the two lines approach each
other as the density delocalizes with temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .constants import CONSTANTS
from .dynamics import SignalSeries
from .molecular import AngularDensity, gibbs_density
from .spectrum import Spectrum, transform

PROTON_NU0_20T = CONSTANTS.gamma_p * 20.0


def ring_shift_map(amplitude_ppm: float = 2.0, offset_ppm: float = 0.0) -> Callable:
    """Position p(theta) = offset + amplitude cos(theta), in ppm."""
    return lambda theta: offset_ppm + amplitude_ppm * np.cos(theta)


def asymmetric_rate_map(rate: float = 300.0, modulation: float = 0.6) -> Callable:
    """Decay rate rate (1 + modulation sin(theta)); the sine breaks theta -> -theta."""
    if not 0.0 <= modulation < 1.0:
        raise ValueError("modulation must lie in [0, 1)")
    return lambda theta: rate * (1.0 + modulation * np.sin(theta))


@dataclass
class ForwardModel:
    """Per-angle line positions and rates on a uniform rotating-frame time grid."""

    theta: np.ndarray
    position_ppm: np.ndarray
    rates: np.ndarray
    nu0: float = PROTON_NU0_20T
    dt: float = 1e-4
    n_samples: int = 1024
    amplitude: float = 0.5
    _basis: np.ndarray | None = field(default=None, repr=False)
    _grid: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.position_ppm = np.asarray(self.position_ppm, dtype=float)
        self.rates = np.asarray(self.rates, dtype=float)
        if not (self.theta.shape == self.position_ppm.shape == self.rates.shape):
            raise ValueError("theta, position and rate tables must have equal shapes")
        if np.any(self.rates <= 0.0):
            raise ValueError("line rates must be positive")

    @classmethod
    def from_maps(cls, n_theta: int, position_map: Callable, rate_map: Callable,
                  **kw) -> "ForwardModel":
        theta = 2.0 * math.pi * np.arange(n_theta) / n_theta
        return cls(theta, position_map(theta), rate_map(theta), **kw)

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)

    @property
    def offsets(self) -> np.ndarray:
        """Angular frequency offsets of the lines from nu0 (rad/s)."""
        return self.position_ppm * 1e-6 * self.nu0

    def signal(self, weights) -> SignalSeries:
        w = self.amplitude * np.asarray(weights, dtype=complex)
        samples = kernels.damped_sum(w, self.rates, self.offsets, self.t)
        return SignalSeries(0.0, self.dt, samples, "rotating", self.nu0,
                            {"nu_ref_rad_s": self.nu0, "model": "angular-forward"})

    def spectrum(self, weights) -> Spectrum:
        return transform(self.signal(weights), keep=self.n_samples)

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """(frequency offsets, matrix B) with spectrum(w).values == B @ w."""
        if self._basis is None:
            cols = []
            for j in range(self.theta.size):
                e = np.zeros(self.theta.size)
                e[j] = 1.0
                sp = self.spectrum(e)
                cols.append(sp.values)
            self._basis = np.stack(cols, axis=1)
            self._grid = sp.offset
        return self._grid, self._basis


def forward_spectrum(density: AngularDensity, model: ForwardModel) -> Spectrum:
    if density.theta.shape != model.theta.shape or not np.allclose(density.theta, model.theta):
        raise ValueError("density and forward model use different theta grids")
    sp = model.spectrum(density.weights)
    sp.meta.update({"n_theta": int(model.theta.size)})
    return sp


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w >= 0, sum w = 1} (sort-based algorithm)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    w = np.maximum(v - tau, 0.0)
    return w / w.sum()


@dataclass
class ReconstructionProblem:
    target: Spectrum
    model: ForwardModel
    energy_curve: Callable | None = None
    temperature: float = 293.0
    initial: AngularDensity | None = None
    n_coefficients: int = 16
    regularization: float = 1e-3
    threshold: float = 0.02
    component: str = "complex"

    def __post_init__(self):
        if not 1 <= self.n_coefficients <= 16 or self.n_coefficients % 2:
            raise ValueError("n_coefficients must be an even number between 2 and 16")
        if self.component not in ("complex", "real"):
            raise ValueError("component must be 'complex' or 'real'")
        if self.initial is None and self.energy_curve is None:
            raise ValueError("need an initial density or an energy curve")


@dataclass
class ReconstructionResult:
    density: AngularDensity
    objective: float
    iterations: int
    converged: bool
    trace: list[float]
    initial_objective: float
    meta: dict = field(default_factory=dict)


def _fourier_basis(theta: np.ndarray, n_coeff: int) -> np.ndarray:
    rows = []
    for m in range(1, n_coeff // 2 + 1):
        rows.append(np.cos(m * theta))
        rows.append(np.sin(m * theta))
    return np.array(rows) / theta.size


def _target_on_grid(target: Spectrum, grid: np.ndarray) -> np.ndarray:
    if target.offset.shape == grid.shape and np.allclose(target.offset, grid):
        vals = target.values
    else:
        vals = (np.interp(grid, target.offset, target.values.real, left=0.0, right=0.0)
                + 1j * np.interp(grid, target.offset, target.values.imag, left=0.0, right=0.0))
    peak = np.abs(vals).max()
    if peak == 0.0:
        raise ValueError("target spectrum is zero on the model grid")
    return vals / peak


def spectral_misfit(model_vals: np.ndarray, target: np.ndarray, component: str = "complex") -> float:
    """Relative RMS ||s F - y|| / ||y|| with the best non-negative real scale s."""
    f, y = (model_vals.real, target.real) if component == "real" else (model_vals, target)
    denom = np.vdot(f, f).real
    s = max(np.vdot(f, y).real / denom, 0.0) if denom > 0 else 0.0
    return float(np.linalg.norm(s * f - y) / np.linalg.norm(y))


def reconstruct(problem: ReconstructionProblem, max_iter: int = 4000, tol: float = 1e-10,
                seed: int = 0) -> ReconstructionResult:
    """Fit an angular density to ``problem.target``.

    Objective: relative spectral RMS plus ``regularization`` * n * sum (w - 1/n)^2,
    a quadratic stand-in for negative entropy that selects the flattest of
    spectrally equivalent densities.
    """
    model = problem.model
    grid, B = model.basis()
    y = _target_on_grid(problem.target, grid)
    theta = model.theta
    n = theta.size
    if problem.initial is not None:
        w0 = problem.initial.weights
    else:
        w0 = gibbs_density(problem.energy_curve, problem.temperature, n).weights
    F = _fourier_basis(theta, problem.n_coefficients)

    def density(c):
        return project_simplex(w0 + c @ F)

    def objective(c):
        w = density(c)
        reg = problem.regularization * n * float(np.sum((w - 1.0 / n) ** 2))
        return spectral_misfit(B @ w, y, problem.component) + reg

    trace: list[float] = []
    best = [math.inf]

    def tracked(c):
        v = objective(c)
        best[0] = min(best[0], v)
        trace.append(best[0])
        return v

    rng = np.random.default_rng(seed)
    c0 = np.zeros(problem.n_coefficients)
    step = 0.5 * rng.choice([-1.0, 1.0], size=problem.n_coefficients)
    simplex = np.vstack([c0, c0 + np.diag(step)])
    f0 = objective(c0)
    res = minimize(tracked, c0, method="Nelder-Mead",
                   options={"maxiter": max_iter, "maxfev": 4 * max_iter, "xatol": tol,
                            "fatol": tol, "initial_simplex": simplex, "adaptive": True})
    c_best = res.x if res.fun <= f0 else c0
    w = density(c_best)
    misfit = spectral_misfit(B @ w, y, problem.component)
    converged = bool(misfit <= problem.threshold)
    out = AngularDensity(theta, w, {"source": "reconstruction", "seed": seed})
    return ReconstructionResult(out, misfit, int(res.nit), converged, trace, f0,
                                {"optimizer": "nelder-mead", "optimizer_success": bool(res.success),
                                 "regularization": problem.regularization,
                                 "threshold": problem.threshold,
                                 "n_coefficients": problem.n_coefficients})


# --- temperature ladder ----------------------------------------------------------


@dataclass(frozen=True)
class TwoSiteModel:
    """Two nuclei on a rotor; site B sits at theta + pi.

    Position of site A: base + ring exp(kappa (cos theta - 1)) in ppm.
    """

    base_ppm: float = 0.0
    ring_ppm: float = 2.0
    kappa: float = 2.0
    rate: float = 1000.0
    nu0: float = PROTON_NU0_20T

    def position(self, theta, site: str):
        shift = math.pi if site == "B" else 0.0
        return self.base_ppm + self.ring_ppm * np.exp(self.kappa * (np.cos(np.asarray(theta) + shift) - 1.0))


@dataclass
class LadderStep:
    temperature: float
    spectrum: Spectrum
    positions_ppm: tuple[float, float]
    peaks_ppm: list[float]

    @property
    def separation(self) -> float:
        return max(self.peaks_ppm) - min(self.peaks_ppm) if len(self.peaks_ppm) > 1 else 0.0


def find_peaks_real(spec: Spectrum, level: float = 0.1) -> list[float]:
    """ppm positions of local maxima of Re S above ``level`` times its maximum."""
    r = spec.values.real
    top = r.max()
    inner = (r[1:-1] > r[:-2]) & (r[1:-1] >= r[2:]) & (r[1:-1] > level * top)
    idx = np.nonzero(inner)[0] + 1
    ppm = spec.ppm
    out = []
    for i in idx:
        # parabolic refinement of the maximum
        y0, y1, y2 = r[i - 1], r[i], r[i + 1]
        den = y0 - 2.0 * y1 + y2
        frac = 0.5 * (y0 - y2) / den if den != 0 else 0.0
        out.append(float(ppm[i] + frac * (ppm[i + 1] - ppm[i])))
    return out


def temperature_ladder(energy_curve: Callable, temperatures, model: TwoSiteModel | None = None,
                       n_theta: int = 256, dt: float = 2e-5, n_samples: int = 8192) -> list[LadderStep]:
    """Spectra of the two-site rotor at increasing temperatures."""
    model = model or TwoSiteModel()
    temps = [float(T) for T in temperatures]
    if any(b <= a for a, b in zip(temps, temps[1:])):
        raise ValueError("temperatures must be strictly increasing")
    steps = []
    t = dt * np.arange(n_samples)
    for T in temps:
        dens = gibbs_density(energy_curve, T, n_theta)
        pos = tuple(float(np.sum(dens.weights * model.position(dens.theta, s))) for s in ("A", "B"))
        offsets = np.array(pos) * 1e-6 * model.nu0
        samples = kernels.damped_sum(np.array([0.5, 0.5], dtype=complex),
                                     np.full(2, model.rate), offsets, t)
        sig = SignalSeries(0.0, dt, samples, "rotating", model.nu0,
                           {"nu_ref_rad_s": model.nu0, "temperature_K": T})
        sp = transform(sig)
        steps.append(LadderStep(T, sp, pos, find_peaks_real(sp)))
    return steps


__all__ = [
    "PROTON_NU0_20T",
    "ring_shift_map",
    "asymmetric_rate_map",
    "ForwardModel",
    "forward_spectrum",
    "project_simplex",
    "ReconstructionProblem",
    "ReconstructionResult",
    "spectral_misfit",
    "reconstruct",
    "TwoSiteModel",
    "LadderStep",
    "find_peaks_real",
    "temperature_ladder",
]
