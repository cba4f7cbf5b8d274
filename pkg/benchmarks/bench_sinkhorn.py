"""Compare the compiled and pure-numpy Sinkhorn kernels on episode-shaped
problems (NQ x N cost matrices).

Usage: python benchmarks/bench_sinkhorn.py [--instances 200]
"""

import argparse
import time

import numpy as np

from fseval import _sinkhorn_py

try:
    from fseval import _sinkhorn_cy
except ImportError:
    _sinkhorn_cy = None


def bench(kernel, instances, shape, eps, tol):
    rng = np.random.default_rng(0)
    mats = [rng.random(shape) * 4.0 for _ in range(instances)]
    start = time.perf_counter()
    total_iters = 0
    for D in mats:
        _, iters, _, _ = kernel.sinkhorn_uniform(D, eps, 5000, tol)
        total_iters += iters
    elapsed = time.perf_counter() - start
    return elapsed, total_iters


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--instances", type=int, default=50)
    args = parser.parse_args()

    for eps in (0.1, 0.01, 1e-3):
        for shape in ((75, 5), (375, 5)):
            line = f"eps={eps:<6} shape={shape[0]}x{shape[1]}:"
            t_py, iters = bench(
                _sinkhorn_py, args.instances, shape, eps, 1e-8
            )
            line += f"  pure {t_py:.3f}s"
            if _sinkhorn_cy is not None:
                t_cy, _ = bench(_sinkhorn_cy, args.instances, shape, eps, 1e-8)
                line += f"  compiled {t_cy:.3f}s  speedup {t_py / t_cy:.1f}x"
            line += f"  ({iters / args.instances:.0f} iters/instance)"
            print(line)


if __name__ == "__main__":
    main()
