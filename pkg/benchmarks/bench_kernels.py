"""Compiled vs numpy kernels: Koszul connection and curvature on random frames.

    python3 benchmarks/bench_kernels.py [--repeat N] [--dims 3 5 7 9]
"""
import argparse
import timeit

import numpy as np

from kappamu import _pykernels, kernels


def random_frame(dm: int, seed: int):
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(dm, dm, dm))
    C = C - C.transpose(1, 0, 2)
    A = rng.normal(size=(dm, dm))
    g = A @ A.T + dm * np.eye(dm)
    return C, g, np.linalg.inv(g)


def bench(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=20, repeat=repeat)) / 20


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--dims", type=int, nargs="+", default=[3, 5, 7, 9, 11])
    args = parser.parse_args()
    ck = kernels._ckernels
    print(f"compiled kernels: {'available' if ck is not None else 'missing'}")
    print(f"{'dim':>4} {'kernel':>8} {'python (us)':>12} {'compiled (us)':>14} {'speedup':>8} {'max diff':>10}")
    for dm in args.dims:
        C, g, ginv = random_frame(dm, dm)
        gamma = _pykernels.koszul_gamma(C, g, ginv, dm)
        cases = (
            ("koszul", lambda: _pykernels.koszul_gamma(C, g, ginv, dm),
             (lambda: ck.koszul_gamma(C, g, ginv, dm)) if ck else None),
            ("riemann", lambda: _pykernels.riemann(gamma, C, dm),
             (lambda: ck.riemann(gamma, C, dm)) if ck else None),
        )
        for name, py, cy in cases:
            tp = bench(py, args.repeat) * 1e6
            if cy is None:
                print(f"{dm:>4} {name:>8} {tp:>12.1f} {'-':>14} {'-':>8} {'-':>10}")
                continue
            tc = bench(cy, args.repeat) * 1e6
            diff = float(np.abs(np.asarray(py()) - np.asarray(cy())).max())
            print(f"{dm:>4} {name:>8} {tp:>12.1f} {tc:>14.1f} {tp / tc:>7.1f}x {diff:>10.1e}")


if __name__ == "__main__":
    main()
