"""Time the eigensolver backends on dilute Wigner samples.

    python3 benchmarks/bench_eig.py [--sizes 100 200 400] [--repeats 5] [--vectors]

The numba kernels and their numpy twins are imported directly, so both run
in one process regardless of DILUTE_WIGNER_NO_NUMBA. LAPACK is the reference.
"""
import argparse
import time

import numpy as np

from dilute_wigner.eig import _fallback, _native
from dilute_wigner.ensemble import EnsembleConfig, draw_sample


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--vectors", action="store_true")
    args = ap.parse_args()

    from dilute_wigner.eig import _kernels

    vec = args.vectors
    print(f"{'n':>6} {'numba ms':>10} {'numpy ms':>10} {'lapack ms':>10} {'max |dl|':>10}")
    for n in args.sizes:
        a = draw_sample(EnsembleConfig(n, n ** 0.8, seed=1), 0).entries
        _native(a, vec, _kernels)  # compile outside the timing
        t_nb = _time(lambda: _native(a, vec, _kernels), args.repeats)
        t_np = _time(lambda: _native(a, vec, _fallback), max(1, args.repeats // 2))
        ref = np.linalg.eigh if vec else np.linalg.eigvalsh
        t_la = _time(lambda: ref(a), args.repeats)
        err = np.max(np.abs(_native(a, False, _kernels)[0] - np.linalg.eigvalsh(a)))
        print(f"{n:>6} {1e3 * t_nb:>10.2f} {1e3 * t_np:>10.2f} {1e3 * t_la:>10.2f} {err:>10.1e}")


if __name__ == "__main__":
    main()
