#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Run after building the extension (python setup.py build_ext --inplace):

    python3 benchmarks/bench_kernels.py
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from scipy import ndimage  # noqa: E402

from orthosketch.kernels import _fallback  # noqa: E402

try:
    from orthosketch.kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats=5):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def gradient_field(size=512, seed=0):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 255, size=(size, size))
    smooth = ndimage.gaussian_filter(img, sigma=1.4, mode="nearest")
    gx = ndimage.sobel(smooth, axis=1, mode="nearest")
    gy = ndimage.sobel(smooth, axis=0, mode="nearest")
    return np.hypot(gx, gy), gx, gy


def main():
    backends = [("python", _fallback)]
    if _native is not None:
        backends.append(("native", _native))
    else:
        print("note: compiled kernels not built; showing fallback only\n")

    mag, gx, gy = gradient_field()
    peak = mag.max()
    strong = mag >= 0.3 * peak
    weak = (mag >= 0.1 * peak) & ~strong

    rng = np.random.default_rng(1)
    xs = rng.uniform(-256, 256, 20000)
    ys = rng.uniform(-256, 256, 20000)
    queries = rng.uniform(-256, 256, (200, 2))
    rays = rng.uniform(-64, 64, (128, 2))
    tan_cone = math.tan(math.radians(5.0))

    cases = {
        "nonmax_suppress 512x512": lambda impl: impl.nonmax_suppress(mag, gx, gy),
        "hysteresis 512x512": lambda impl: impl.hysteresis(strong, weak),
        "nearest_index 200q x 20k pts": lambda impl: [
            impl.nearest_index(xs, ys, qx, qy) for qx, qy in queries
        ],
        "corridor_select 128 rays x 20k pts": lambda impl: [
            impl.corridor_select(xs, ys, ox, oy, 1.0, 0.0, tan_cone, 1.0, 1.25)
            for ox, oy in rays
        ],
    }

    width = max(len(k) for k in cases)
    header = f"{'kernel'.ljust(width)}  " + "  ".join(
        f"{name:>10}" for name, _ in backends
    )
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, fn in cases.items():
        times = [timeit(lambda impl=impl: fn(impl)) for _, impl in backends]
        row = f"{label.ljust(width)}  " + "  ".join(f"{t * 1e3:9.2f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
