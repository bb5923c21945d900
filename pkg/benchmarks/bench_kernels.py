"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--sizes 511 4095 65535] [--repeat 50] [--p 4]

Also times one energy + gradient evaluation of the full functional, which is
dominated by the transforms and the phi solve rather than by the kernels.
"""

import argparse
import timeit

import numpy as np

from kgmradial import ModelParams, PotentialSpec, RadialGrid, kernels
from kgmradial.functional import gradient_J
from kgmradial.mountain_pass import gaussian_seed


def bench(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[511, 4095, 65535])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--p", type=float, default=4.0, help="nonlinearity exponent")
    args = ap.parse_args()

    print(f"compiled backend available: {kernels.BACKEND == 'cython'}")
    print(f"{'kernel':<18}{'n':>8}{'python [us]':>14}{'compiled [us]':>15}{'speedup':>9}")
    rng = np.random.default_rng(0)
    for n in args.sizes:
        u = rng.normal(size=n)
        phi = rng.uniform(0, 0.3, n)
        vs = rng.uniform(0.5, 1.0, n)
        w = rng.uniform(0, 1, n)
        cases = {
            "energy_sums": lambda b: kernels.energy_sums(u, phi, vs, w, args.p, backend=b),
            "gradient_density": lambda b: kernels.gradient_density(u, phi, vs, 0.3, args.p, backend=b),
            "power_sum": lambda b: kernels.power_sum(u, w, args.p, backend=b),
            "ratio_grid_min": lambda b: kernels.ratio_grid_min(np.abs(u) + 1e-3, 0.9, 0.4, backend=b),
        }
        for name, f in cases.items():
            tp = bench(lambda: f("python"), args.repeat) * 1e6
            tc = bench(lambda: f(None), args.repeat) * 1e6
            print(f"{name:<18}{n:>8}{tp:>14.1f}{tc:>15.1f}{tp / tc:>9.2f}")

    params = ModelParams(0.5, -0.3, 4.0, 0.3, PotentialSpec.constant(1.0))
    for N in (255, 1023):
        grid = RadialGrid(20.0, N)
        u = gaussian_seed(grid)
        t = bench(lambda: gradient_J(u, params), max(5, args.repeat // 10))
        print(f"gradient_J N={N}: {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
