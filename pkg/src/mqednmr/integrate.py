"""Numerical integration engine.

Adaptive 1D quadrature (QUADPACK Gauss-Kronrod through scipy), nested
quadrature over the ordered-time simplex, and a seeded batched Monte Carlo
estimator with jackknife errors.

Random streams are Philox generators keyed by ``(seed, batch)``; batch results
are reduced in batch order, so the estimate does not depend on how many
workers evaluated the batches.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _spi


@dataclass(frozen=True)
class IntegratorConfig:
    mode: str = "quadrature"
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_evals: int = 2000
    seed: int | None = None
    samples: int = 1_000_000
    batches: int = 64
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("quadrature", "monte-carlo"):
            raise ValueError(f"unknown integrator mode {self.mode!r}")
        if not self.rel_tol > 0.0 or self.abs_tol < 0.0:
            raise ValueError("rel_tol must be > 0 and abs_tol >= 0")
        if self.abs_tol == 0.0 and self.rel_tol < 50 * 2.220446049250313e-16:
            raise ValueError("rel_tol below 50 machine epsilons needs a positive abs_tol")
        if self.mode == "monte-carlo":
            if self.seed is None:
                raise ValueError("monte-carlo mode requires a seed")
            if self.samples < 2 * self.batches or self.batches < 2:
                raise ValueError("need at least two batches of two samples")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class EstimateWithError:
    value: complex | float
    error: float
    evals: int
    converged: bool = True
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.error >= 0.0:
            raise ValueError("error estimate must be non-negative")


class NonConvergenceWarning(RuntimeWarning):
    pass


def _quad_real(f, a, b, config, points=None):
    limit = max(50, config.max_evals // 21)
    # with full_output, quadpack reports trouble as a fourth return value
    res = _spi.quad(f, a, b, epsabs=config.abs_tol, epsrel=config.rel_tol,
                    limit=limit, points=points, full_output=1)
    val, err, info = res[:3]
    return val, err, info["neval"], len(res) == 3


def quad_1d(f: Callable[[float], complex], a: float, b: float,
            config: IntegratorConfig | None = None, *, points=None,
            complex_valued: bool = False) -> EstimateWithError:
    """Adaptive quadrature of ``f`` over ``[a, b]``.

    ``b = inf`` is handled with the map k = a + d*u/(1-u) onto [0, 1).
    Non-convergence is reported in ``flags`` together with the partial
    estimate; it is not raised.
    """
    config = config or IntegratorConfig()
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    if math.isinf(b):
        scale = max(1.0, abs(a))
        g = f

        def f(u, g=g):  # noqa: E731
            return g(a + scale * u / (1.0 - u)) * scale / (1.0 - u) ** 2

        a, b = 0.0, 1.0
        points = None

    if complex_valued:
        re = _quad_real(lambda x: f(x).real, a, b, config, points)
        im = _quad_real(lambda x: f(x).imag, a, b, config, points)
        value = complex(re[0], im[0])
        err = math.hypot(re[1], im[1])
        evals = re[2] + im[2]
        # a part that integrates to zero cannot meet a relative tolerance alone
        ok = (re[3] and im[3]) or err <= max(config.abs_tol, config.rel_tol * abs(value))
    else:
        value, err, evals, ok = _quad_real(f, a, b, config, points)
    flags = [] if ok else ["quadrature did not reach tolerance"]
    if not ok:
        warnings.warn(f"quad_1d on [{a}, {b}] did not converge; error {err:.3g}",
                      NonConvergenceWarning, stacklevel=2)
    return EstimateWithError(value, float(err), int(evals), ok, flags)


def time_ordered_2(f: Callable[[float, float], complex], upper: float,
                   config: IntegratorConfig | None = None, *,
                   complex_valued: bool = False) -> EstimateWithError:
    """Integrate ``f(s1, s2)`` over the ordered simplex 0 <= s2 <= s1 <= upper."""
    config = config or IntegratorConfig()
    if not upper > 0.0:
        raise ValueError("upper limit must be positive")
    inner_cfg = IntegratorConfig(rel_tol=config.rel_tol, abs_tol=config.abs_tol,
                                 max_evals=config.max_evals)
    evals = 0
    inner_err = 0.0
    ok = True

    def outer(s1):
        nonlocal evals, inner_err, ok
        if s1 <= 0.0:
            return 0.0 * f(0.0, 0.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NonConvergenceWarning)
            r = quad_1d(lambda s2: f(s1, s2), 0.0, s1, inner_cfg,
                        complex_valued=complex_valued)
        evals += r.evals
        inner_err = max(inner_err, r.error)
        ok = ok and r.converged
        return r.value

    res = quad_1d(outer, 0.0, upper, config, complex_valued=complex_valued)
    res.evals += evals
    res.error += inner_err * upper
    if not ok:
        res.converged = False
        res.flags.append("inner quadrature did not reach tolerance")
    return res


# --- Monte Carlo ---------------------------------------------------------------


def stream(seed: int, batch: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, batch)``; independent of worker layout."""
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, batch]))


@dataclass(frozen=True)
class Dimension:
    """One factor of a product domain.

    ``kind`` is one of ``uniform`` (box [low, high]), ``radial-1s`` (3-vector
    drawn from the hydrogen 1s density with length scale ``scale``; the
    integrand is then understood as an expectation under that density),
    ``shell`` (3-vector uniform in the spherical shell low <= |k| <= high) or
    ``simplex`` (pair uniform on [0, high]^2, zero weight outside s2 <= s1).
    """

    kind: str
    low: float = 0.0
    high: float = 1.0
    scale: float = 1.0

    @property
    def width(self) -> int:
        return {"uniform": 1, "radial-1s": 3, "shell": 3, "simplex": 2}[self.kind]


def sample_dimension(dim: Dimension, u: np.ndarray):
    """Map uniforms ``u`` with shape (n, width) to points and weights (volume factors)."""
    n = u.shape[0]
    if dim.kind == "uniform":
        x = dim.low + (dim.high - dim.low) * u[:, 0]
        return x, np.full(n, dim.high - dim.low)
    if dim.kind == "radial-1s":
        r = radius_1s_inverse_cdf(u[:, 0]) * dim.scale
        v = _isotropic(u[:, 1], u[:, 2])
        return v * r[:, None], np.ones(n)
    if dim.kind == "shell":
        lo3, hi3 = dim.low**3, dim.high**3
        k = np.cbrt(lo3 + (hi3 - lo3) * u[:, 0])
        v = _isotropic(u[:, 1], u[:, 2])
        vol = 4.0 * math.pi / 3.0 * (hi3 - lo3)
        return v * k[:, None], np.full(n, vol)
    if dim.kind == "simplex":
        s = dim.high * u[:, :2]
        w = np.where(s[:, 1] <= s[:, 0], dim.high**2, 0.0)
        return s, w
    raise ValueError(f"unknown dimension kind {dim.kind!r}")


def _isotropic(u1, u2):
    cos_t = 1.0 - 2.0 * u1
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t**2))
    ph = 2.0 * math.pi * u2
    return np.stack([sin_t * np.cos(ph), sin_t * np.sin(ph), cos_t], axis=1)


def radius_1s_inverse_cdf(u: np.ndarray) -> np.ndarray:
    """Radii (units of a_B) with density 4 r^2 exp(-2r), the 1s radial law.

    The CDF is P(r) = 1 - exp(-2r)(1 + 2r + 2r^2); it is inverted by Newton
    iteration on the monotone function, started from the Gamma(3) median
    approximation.
    """
    u = np.asarray(u, dtype=float)
    target = np.clip(u, 0.0, 1.0 - 1e-16)
    r = np.maximum(0.5 * (-np.log1p(-target) + 1.337), 1e-3)
    for _ in range(60):
        e = np.exp(-2.0 * r)
        cdf = 1.0 - e * (1.0 + 2.0 * r + 2.0 * r * r)
        pdf = 4.0 * r * r * e
        step = (cdf - target) / np.maximum(pdf, 1e-300)
        r_new = np.maximum(r - step, 0.5 * r)
        if np.all(np.abs(r_new - r) <= 1e-15 * np.maximum(r_new, 1e-12)):
            r = r_new
            break
        r = r_new
    return r


def mc_integrate(f: Callable[..., np.ndarray], domain: Sequence[Dimension],
                 config: IntegratorConfig) -> EstimateWithError:
    """Seeded Monte Carlo estimate of the integral of ``f`` over a product domain.

    ``f`` receives one array per dimension (shape (n,) or (n, width)) and must
    return an array of n values. Samples are split into ``config.batches``
    independent batches; the first uniform coordinate is stratified inside each
    batch. The error is the jackknife standard error over batches.
    """
    if config.mode != "monte-carlo":
        raise ValueError("mc_integrate needs a monte-carlo IntegratorConfig")
    width = sum(d.width for d in domain)
    per_batch = config.samples // config.batches

    def run_batch(b):
        rng = stream(config.seed, b)
        u = rng.random((per_batch, width))
        strata = (np.arange(per_batch) + u[:, 0]) / per_batch
        u[:, 0] = strata[rng.permutation(per_batch)]
        args, weight, col = [], np.ones(per_batch), 0
        for d in domain:
            x, w = sample_dimension(d, u[:, col:col + d.width])
            args.append(x)
            weight = weight * w
            col += d.width
        vals = np.asarray(f(*args)) * weight
        return vals.mean()

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            means = list(pool.map(run_batch, range(config.batches)))
    else:
        means = [run_batch(b) for b in range(config.batches)]
    means = np.asarray(means)
    B = means.size
    value = means.sum() / B
    loo = (value * B - means) / (B - 1)
    var = (B - 1) / B * np.sum(np.abs(loo - loo.mean()) ** 2)
    se = float(math.sqrt(var))
    flags = []
    if se == 0.0:
        flags.append("zero variance across batches")
    if np.isrealobj(means):
        value = float(value)
    else:
        value = complex(value)
    return EstimateWithError(value, se, per_batch * B, True, flags)


__all__ = [
    "IntegratorConfig",
    "EstimateWithError",
    "NonConvergenceWarning",
    "quad_1d",
    "time_ordered_2",
    "Dimension",
    "sample_dimension",
    "radius_1s_inverse_cdf",
    "stream",
    "mc_integrate",
]
