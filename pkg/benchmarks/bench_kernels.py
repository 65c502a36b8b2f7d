"""Compare the compiled and numpy box-sum kernels, and end-to-end fusion.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from statfuse import window_stats
from statfuse.fusion import FusionConfig, FusionMethod, fuse_stack
from statfuse.raster import Band, ImageStack
from statfuse.window_stats import WindowSpec, local_mean


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    pan = Band(rng.integers(0, 64, size=(525, 600)), bit_depth=6)
    ms = ImageStack.from_array(rng.integers(0, 256, size=(3, 105, 120)))
    hard = 1e9 + rng.uniform(0, 1, size=(525, 600))

    print(f"{'backend':8} {'task':28} {'seconds':>9}")
    for backend in window_stats.available_backends():
        window_stats.use_backend(backend)
        box = window_stats._box_sum
        for size in (5, 11, 31):
            t = best_of(lambda: box(pan.data, size, size), args.repeat)
            print(f"{backend:8} {f'box_sum {size}x{size} 600x525':28} {t:9.4f}")
        t = best_of(lambda: local_mean(pan, WindowSpec.square(11)), args.repeat)
        print(f"{backend:8} {'local_mean 11x11':28} {t:9.4f}")
        for method in FusionMethod:
            cfg = FusionConfig(method, ratio=5)
            t = best_of(lambda: fuse_stack(pan, ms, cfg), args.repeat)
            print(f"{backend:8} {f'fuse {method.value} 3 bands':28} {t:9.4f}")

    # accuracy on a large-offset band, against exact per-window sums
    from math import fsum
    from numpy.lib.stride_tricks import sliding_window_view

    sub = hard[:60, :60]
    wins = sliding_window_view(np.pad(sub, 5, mode="edge"), (11, 11))
    exact = np.array([[fsum(wins[i, j].ravel()) for j in range(60)] for i in range(60)])
    for backend in window_stats.available_backends():
        window_stats.use_backend(backend)
        err = np.max(np.abs(window_stats._box_sum(sub, 11, 11) - exact) / exact)
        print(f"{backend:8} {'max rel error, offset 1e9':28} {err:9.2e}")


if __name__ == "__main__":
    main()
