"""Compare the compiled and pure-Python exact kernels on random integer matrices.

    python3 benchmarks/bench_kernels.py --sizes 4x6 6x8 8x10 --repeat 5
"""
import argparse
import time

import numpy as np

from sfid._kernels import _pure

try:
    from sfid._kernels import _ext
except ImportError:
    _ext = None


def _time(fn, re, im, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        value = fn(re, im)
        best = min(best, time.perf_counter() - t)
    return best, value


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", nargs="+", default=["4x6", "6x8", "8x10"])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    backends = [("python", _pure)] + ([("cython", _ext)] if _ext is not None else [])
    print(f"{'kernel':<18}{'shape':>8}" + "".join(f"{name:>14}" for name, _ in backends))
    for size in args.sizes:
        m, r = (int(v) for v in size.split("x"))
        re = rng.integers(-5, 6, size=(m, r)).tolist()
        im = rng.integers(-5, 6, size=(m, r)).tolist()
        for kernel in ("gauss_int_rank", "gauss_int_kruskal"):
            cells, values = [], set()
            for _, mod in backends:
                secs, value = _time(getattr(mod, kernel), re, im, args.repeat)
                cells.append(f"{secs * 1e3:>12.3f}ms")
                values.add(value)
            flag = "" if len(values) == 1 else "  MISMATCH"
            print(f"{kernel:<18}{size:>8}" + "".join(f"{c:>14}" for c in cells) + flag)


if __name__ == "__main__":
    main()
