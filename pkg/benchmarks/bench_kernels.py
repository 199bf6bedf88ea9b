#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

The texture-code and gradient-histogram kernels run once per image and
dominate end-to-end pipeline time, which is why they have a compiled twin.

    python3 benchmarks/bench_kernels.py [--images N] [--size PX]
"""

import argparse
import time

import numpy as np

from pupguard import _kernels_py
from pupguard.features import gradient_field

try:
    from pupguard import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(images: int, size: int) -> None:
    rng = np.random.default_rng(0)
    batch = [rng.integers(0, 256, (size, size), dtype=np.uint8) for _ in range(images)]
    grads = [gradient_field(img) for img in batch]

    backends = [("python", _kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled extension not available; benchmarking fallback only")

    results = {}
    for name, impl in backends:
        lbp = _time(lambda: [impl.lbp_code_image(img) for img in batch], 3)
        hog = _time(
            lambda: [
                impl.hog_cell_histograms(g.magnitude, g.orientation, 8, 9)
                for g in grads
            ],
            3,
        )
        results[name] = (lbp, hog)
        print(
            f"{name:7s}  lbp_code_image: {lbp / images * 1e3:8.3f} ms/img   "
            f"hog_cell_histograms: {hog / images * 1e3:8.3f} ms/img"
        )

    if len(results) == 2:
        lbp_speedup = results["python"][0] / results["cython"][0]
        hog_speedup = results["python"][1] / results["cython"][1]
        print(f"speedup  lbp_code_image: {lbp_speedup:8.2f}x        "
              f"hog_cell_histograms: {hog_speedup:8.2f}x")
        # the twins must agree before any timing is meaningful
        img = batch[0]
        assert np.array_equal(
            _kernels.lbp_code_image(img), _kernels_py.lbp_code_image(img)
        )
        g = grads[0]
        assert np.allclose(
            _kernels.hog_cell_histograms(g.magnitude, g.orientation, 8, 9),
            _kernels_py.hog_cell_histograms(g.magnitude, g.orientation, 8, 9),
            atol=1e-12,
        )
        print("backend agreement verified")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--images", type=int, default=50)
    parser.add_argument("--size", type=int, default=160)
    args = parser.parse_args()
    bench(args.images, args.size)
