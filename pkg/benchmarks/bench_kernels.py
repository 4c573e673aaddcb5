"""Time the compiled kernels against the NumPy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]

Reports the best of ``--repeat`` runs for K0 on a log grid, the K0 integral,
the trapezoid cosine sum (direct summation in each backend and the FFT path
used by default), and one end-to-end density inversion per method.
"""

import argparse
import importlib
import json
import sys
import timeit

import numpy as np

from ccistat import _kernels_py
from ccistat.cci import GridSpec, InterferenceCf, invert_cf
from ccistat.cci.inversion import _cosine_sum_fft


def _backends():
    out = {"python": _kernels_py}
    try:
        out["cython"] = importlib.import_module("ccistat._kernels")
    except ImportError:
        print("compiled extension not built; timing the NumPy fallback only", file=sys.stderr)
    return out


def _best(func, repeat):
    number = 1
    while timeit.timeit(func, number=number) < 0.2 and number < 1_000_000:
        number *= 2
    return min(timeit.repeat(func, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", metavar="PATH", help="also write the timings as JSON")
    args = parser.parse_args(argv)

    x = np.geomspace(1e-6, 700.0, 100_000)
    b = np.linspace(0.0, 50.0, 10_000)
    rng = np.random.default_rng(0)
    coef = rng.standard_normal(20_000)
    h = 0.01
    points = np.arange(2_001) * 0.02
    size = 65_536

    results = {}
    for name, module in _backends().items():
        results[f"k0 (1e5 points) [{name}]"] = _best(lambda: module.k0(x), args.repeat)
        results[f"k0_integral (1e4 points) [{name}]"] = _best(lambda: module.k0_integral(b), args.repeat)
        results[f"cosine_sum 2e4 x 2e3 [{name}]"] = _best(lambda: module.cosine_sum(coef, h, points), args.repeat)
    results["cosine_sum 2e4 x 2e3 [fft]"] = _best(lambda: _cosine_sum_fft(coef, size, points.size), args.repeat)

    cf = InterferenceCf([1.0, 0.4, 0.1, 0.05, 0.02, 0.01], 0.5, 1e-3)
    grid = GridSpec(0.005, 30.0)
    for method in ("fft", "direct"):
        results[f"invert_cf [{method}]"] = _best(lambda: invert_cf(cf, grid, method=method), max(args.repeat // 2, 1))

    width = max(len(k) for k in results)
    for key, seconds in results.items():
        print(f"{key:<{width}}  {seconds * 1e3:10.3f} ms")
    pairs = [k for k in results if k.endswith("[python]")]
    for key in pairs:
        twin = key.replace("[python]", "[cython]")
        if twin in results:
            print(f"speed-up {key[:-9]}: {results[key] / results[twin]:.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as handle:
            json.dump(results, handle, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
