"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from mapgroups import _pykernels

try:
    from mapgroups import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _cases(rng):
    out = {}
    for k in (64, 1024, 16384):
        xs = rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2))
        out[f"expm_batch 2x2 x{k}"] = ("expm_batch", (xs,))
    for k in (256, 4096):
        xi1 = 0.5 * (rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2)))
        xi2 = 0.5 * (rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2)))
        h = np.full(k, 1.0 / k)
        out[f"magnus4 {k} steps"] = ("magnus4", (xi1, xi2, h, False))
        out[f"magnus4 {k} steps dense"] = ("magnus4", (xi1, xi2, h, True))
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':<28}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, (fn, call_args) in _cases(rng).items():
        def best(mod):
            f = getattr(mod, fn)
            return 1e3 * min(timeit.repeat(lambda: f(*call_args), number=1, repeat=args.repeat))

        py = best(_pykernels)
        if _ckernels is None:
            print(f"{name:<28}{py:>14.3f}{'n/a':>14}{'':>10}")
            continue
        cy = best(_ckernels)
        print(f"{name:<28}{py:>14.3f}{cy:>14.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
