"""Compare the compiled and pure-numpy kernel backends.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from mqednmr.constants import CONSTANTS, ThermalParams
from mqednmr.fields import MODE_PREFACTOR
from mqednmr.kernels import get_backend


def shielding_args(n, rng):
    k = rng.normal(size=(n, 3)) * 4e3
    r = rng.normal(size=(n, 3)) * CONSTANTS.a_B
    beta = ThermalParams(293.0).beta
    s = rng.random((n, 2)) * beta
    amp = np.full(n, 1.0 / 6e3)
    return (k, r, s, amp, MODE_PREFACTOR**2 / CONSTANTS.c, CONSTANTS.hbar * CONSTANTS.c,
            ThermalParams(293.0).x_per_wavenumber)


def damped_args(n, rng):
    m = 64
    w = (rng.random(m) / m).astype(complex)
    rates = 300.0 * (1.0 + rng.random(m))
    offsets = 1e4 * rng.normal(size=m)
    t = 1e-4 * np.arange(n // m)
    return w, rates, offsets, t


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = {"shielding_integrand": shielding_args(args.n, rng),
             "damped_sum": damped_args(args.n, rng)}
    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        cy = None
        print("compiled backend not built; timing the numpy fallback only")
    print(f"{'kernel':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max rel diff':>15}")
    for name, a in cases.items():
        t_py = min(timeit.repeat(lambda: getattr(py, name)(*a), number=1, repeat=args.repeat))
        ref = getattr(py, name)(*a)
        if cy is None:
            print(f"{name:<22}{1e3 * t_py:>14.2f}")
            continue
        t_cy = min(timeit.repeat(lambda: getattr(cy, name)(*a), number=1, repeat=args.repeat))
        out = np.asarray(getattr(cy, name)(*a))
        diff = float(np.max(np.abs(out - ref)) / np.max(np.abs(ref)))
        print(f"{name:<22}{1e3 * t_py:>14.2f}{1e3 * t_cy:>14.2f}{t_py / t_cy:>10.2f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
