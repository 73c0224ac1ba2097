"""Compare the compiled simplex kernel with the pure-Python fallback.

Two workloads: raw pivoting on random feasible LPs, and an end-to-end cone
workload (containment and informativeness on random cones) that issues
thousands of small LPs.  Run with ``python3 benchmarks/bench_kernels.py``.
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from dcgames import _kernels, _simplex_py
from dcgames.cones import contains_cone, is_informative
from dcgames.lp import LinearProgram, solve_lp

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from helpers import random_cone  # noqa: E402


def random_lps(rng, count, m, n):
    lps = []
    for _ in range(count):
        A = rng.uniform(0.0, 1.0, size=(m, n))
        b = rng.uniform(1.0, 2.0, size=m)
        c = rng.normal(size=n)
        cons = [(A[i], "<=", b[i]) for i in range(m)]
        lps.append(LinearProgram(c, cons, [(0.0, None)] * n, "max"))
    return lps


def cone_workload(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        d = int(rng.integers(2, 5))
        A, B = random_cone(rng, d=d), random_cone(rng, d=d)
        contains_cone(A, B)
        is_informative(A)


def timed(run_simplex, fn, repeat):
    saved = _kernels.run_simplex
    _kernels.run_simplex = run_simplex
    try:
        best = np.inf
        for _ in range(repeat):
            t = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t)
        return best
    finally:
        _kernels.run_simplex = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _kernels.BACKEND != "cython":
        print("compiled kernel not available; build with `pip install -e . --no-build-isolation`")
        return 1
    compiled = _kernels.run_simplex
    lps = {size: random_lps(np.random.default_rng(args.seed), 200, *size) for size in ((5, 5), (20, 20), (40, 60))}
    rows = []
    for (m, n), batch in lps.items():
        fn = lambda: [solve_lp(lp) for lp in batch]
        tc = timed(compiled, fn, args.repeat)
        tp = timed(_simplex_py.run_simplex, fn, args.repeat)
        rows.append((f"200 LPs {m}x{n}", tc, tp))
    fn = lambda: cone_workload(args.seed, 100)
    rows.append(("cone checks, 100 pairs", timed(compiled, fn, args.repeat),
                 timed(_simplex_py.run_simplex, fn, args.repeat)))

    print(f"{'workload':<28}{'cython s':>10}{'python s':>10}{'speedup':>9}")
    for name, tc, tp in rows:
        print(f"{name:<28}{tc:>10.3f}{tp:>10.3f}{tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
