"""Time the compiled and numpy series kernels on the same inputs.

    python3 benchmarks/bench_kernels.py --n 2000 --order 40
"""
import argparse
import timeit

import numpy as np

from shapejc._backend import get_kernels


def load_backends():
    out = {"python": get_kernels("python")}
    try:
        out["cython"] = get_kernels("cython")
    except ImportError:
        print("compiled kernel not built; timing the fallback only")
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=2000, help="argument pairs per batch")
    ap.add_argument("--order", type=int, default=40)
    ap.add_argument("--t", type=float, default=1.5)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    x = rng.uniform(-3, 3, args.n)
    w = rng.uniform(-3, 3, args.n)
    backends = load_backends()

    results = {}
    for name, mod in backends.items():
        batch = min(timeit.repeat(lambda: mod.f_series_many(1, 0, x, w, args.t, args.order), number=1, repeat=args.repeat))
        scalar = min(timeit.repeat(lambda: mod.f_series(1, 0, 1.1, -0.7, args.t, args.order), number=200, repeat=args.repeat)) / 200
        results[name] = (batch, scalar, mod.f_series_many(1, 0, x, w, args.t, args.order))
        print(f"{name:>7}: batch {batch * 1e3:9.3f} ms ({batch / args.n * 1e6:8.3f} us/pair)   scalar {scalar * 1e6:8.3f} us")

    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup: batch {py[0] / cy[0]:.1f}x, scalar {py[1] / cy[1]:.1f}x")
        print(f"max |python - cython| = {np.max(np.abs(py[2] - cy[2])):.2e}")


if __name__ == "__main__":
    main()
