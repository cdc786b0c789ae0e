"""Compare the compiled and NumPy simulation kernels.

    python benchmarks/bench_kernels.py [--trials 100000] [--n 100] [--repeat 3]

For every process kind it times ``count_violations`` on both backends, checks
that the counts agree, and prints one CSV row per kind.
"""

import argparse
import sys
import time

from adaptconc import _pykernels
from adaptconc._rng import trial_seeds
from adaptconc.simulate import default_battery

try:
    from adaptconc import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled extension not built; only the NumPy backend is available", file=sys.stderr)
    seeds = trial_seeds(1, 0, args.trials)
    scale = args.n**0.5
    thr = (1.0, 0.0, scale, 1.0)

    print("process,trials,n,python_s,cython_s,speedup,violations")
    for spec in default_battery():
        kind, p1, p2 = spec.kernel
        t_py, k_py = best_of(lambda: _pykernels.count_violations(kind, p1, p2, args.n, seeds, *thr), args.repeat)
        if _ckernels is not None:
            t_c, k_c = best_of(lambda: _ckernels.count_violations(kind, p1, p2, args.n, seeds, *thr), args.repeat)
            if k_c != k_py:
                raise SystemExit(f"backends disagree on {spec}: {k_c} vs {k_py}")
            row = f"{t_c:.4f},{t_py / t_c:.2f}"
        else:
            row = ","
        print(f'"{spec}",{args.trials},{args.n},{t_py:.4f},{row},{k_py}')


if __name__ == "__main__":
    main()
