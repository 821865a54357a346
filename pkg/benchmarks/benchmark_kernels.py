"""Compare the compiled sampling kernels with the pure-numpy fallback.

Usage: python benchmarks/benchmark_kernels.py [N]

Times the three intersection-statistics kernels on identical pre-drawn
sample batches and reports the throughput ratio, along with the maximum
numerical difference between the two backends.
"""

import sys
import time

import numpy as np

from smoothval.kernels import _kernels_py as pyk

try:
    from smoothval.kernels import _kernels as ck
except ImportError:
    ck = None

SQUARE = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
PENT = np.array([(-1.0, -1.0), (1.0, -1.0), (1.4, 0.4), (0.0, 1.3),
                 (-1.2, 0.5)])


def bench(name, fn_py, fn_c, args, repeat=3):
    best_py = min(timeit(fn_py, args) for _ in range(repeat))
    row = f"{name:<22} python {best_py * 1e3:9.1f} ms"
    if fn_c is not None:
        best_c = min(timeit(fn_c, args) for _ in range(repeat))
        out_py = fn_py(*args)
        out_c = fn_c(*args)
        diff = max(float(np.max(np.abs(a - b))) for a, b in zip(out_py, out_c))
        row += (f"   compiled {best_c * 1e3:9.1f} ms"
                f"   speedup {best_py / best_c:5.1f}x   maxdiff {diff:.2e}")
    print(row)


def timeit(fn, args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    rng = np.random.default_rng(0)
    zx = rng.uniform(-2, 3, n)
    zy = rng.uniform(-2, 3, n)
    d = rng.uniform(0, 3, n)
    cos_d = rng.uniform(-1, 1, n)

    print(f"n = {n} samples per call")
    if ck is None:
        print("compiled backend unavailable, timing the fallback only")
    bench("polygon_disk (square)", pyk.polygon_disk_stats,
          ck.polygon_disk_stats if ck else None, (zx, zy, SQUARE, 0.8))
    bench("polygon_disk (pent)", pyk.polygon_disk_stats,
          ck.polygon_disk_stats if ck else None, (zx, zy, PENT, 1.4))
    bench("disk_disk", pyk.disk_disk_stats,
          ck.disk_disk_stats if ck else None, (d, 1.0, 0.7))
    bench("cap_lens", pyk.cap_lens_stats,
          ck.cap_lens_stats if ck else None, (cos_d, 0.8, 1.1))


if __name__ == "__main__":
    main()
