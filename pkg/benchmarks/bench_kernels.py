"""Timing of the compiled transport kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one row per (kernel, size, backend) with the best wall time and the
max deviation from the python result.
"""

import argparse
import timeit

import numpy as np

from ctautomaton import kernels
from ctautomaton.transport import _tables, dispersion


def cases():
    for M in (1_000, 10_000, 100_000):
        w, z = _tables(M, 50.0 * M)
        ds = np.arange(-80, 81)
        yield "propagator_sum", M, (ds, w, z)
    for M in (1_000, 4_000):
        et = dispersion(M) * 5.0 * M
        yield "f_cosine_sum", M, (np.arange(1, M + 1), et)
    for N, M in ((10, 1_000), (20, 2_000)):
        w, z = _tables(M, 5000.0 * N)
        yield "p1_double_sum", M, (N, w, z)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"{'kernel':<16}{'M':>8}{'backend':>9}{'best [ms]':>12}{'speedup':>9}{'max dev':>10}")
    for name, M, fargs in cases():
        ref = None
        base = None
        for b in backends:
            fn = getattr(kernels.get_backend(b), name)
            out = fn(*fargs)
            best = min(timeit.repeat(lambda: fn(*fargs), number=1, repeat=args.repeat))
            if ref is None:
                ref, base = np.asarray(out), best
            dev = float(np.max(np.abs(np.asarray(out) - ref)))
            print(f"{name:<16}{M:>8}{b:>9}{best * 1e3:>12.2f}{base / best:>9.1f}{dev:>10.1e}")


if __name__ == "__main__":
    main()
