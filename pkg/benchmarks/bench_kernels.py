"""Compare the compiled and pure-Python hull kernels.

    python benchmarks/bench_kernels.py [--cases 200] [--repeat 3]
"""

import argparse
import time

import numpy as np

from tverflat import _pykernels

try:
    from tverflat import _ckernels
except ImportError:
    _ckernels = None


def _problems(rng, cases):
    near, gap = [], []
    for _ in range(cases):
        m = int(rng.integers(1, 4))
        near.append((np.ascontiguousarray(rng.normal(size=(int(rng.integers(3, 8)), m))), rng.normal(size=m) * 2))
        sizes = rng.integers(1, 5, size=4)
        pts = np.ascontiguousarray(rng.normal(size=(int(sizes.sum()), m)))
        gap.append((pts, np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)))
    return near, gap


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    near, gap = _problems(np.random.default_rng(args.seed), args.cases)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the Python backend only")

    timings = {}
    for name, mod in backends.items():
        t_near = _time(lambda: [mod.nearest_in_hull(P, t) for P, t in near], args.repeat)
        t_gap = _time(lambda: [mod.common_point_gap(P, o, 10000, 1e-14) for P, o in gap], args.repeat)
        timings[name] = (t_near, t_gap)

    print(f"{'kernel':<18}{'backend':<10}{'per call (us)':>15}{'speedup':>10}")
    for i, kernel in enumerate(["nearest_in_hull", "common_point_gap"]):
        base = timings["python"][i]
        for name, t in timings.items():
            per = 1e6 * t[i] / args.cases
            print(f"{kernel:<18}{name:<10}{per:>15.1f}{base / t[i]:>9.1f}x")


if __name__ == "__main__":
    main()
