"""Time the array kernels against the pure-Python reference.

    python3 benchmarks/bench_accel.py --states 200 2000 --symbols 32
    PHISUM_DISABLE_NUMBA=1 python3 benchmarks/bench_accel.py   # numpy only

Numba compile time is paid once in a warm-up call and excluded.
"""
import argparse
import math
import time

from phisum import accel, pathsum
from phisum.generate import random_automaton


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, nargs="+", default=[100, 500, 2000])
    ap.add_argument("--symbols", type=int, default=32)
    ap.add_argument("--density", type=float, default=0.05)
    ap.add_argument("--phi-prob", type=float, default=0.8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if accel.USING_NUMBA else [])
    print(f"numba {'on' if accel.USING_NUMBA else 'off'}; times in ms, best of {args.repeat}")
    print(f"{'states':>7} {'alg':>7} {'python':>10} " + " ".join(f"{b:>10}" for b in backends))
    for n in args.states:
        a = random_automaton(n, args.symbols, args.density, args.phi_prob, args.seed)
        for alg in ("expand", "memo"):
            ref = pathsum(a, alg).Z
            row = [best_of(lambda: pathsum(a, alg), args.repeat)]
            for b in backends:
                z = accel.fast_pathsum(a, alg, backend=b)  # warm-up, and a sanity check
                assert math.isclose(z, ref, rel_tol=1e-9, abs_tol=1e-300), (b, z, ref)
                row.append(best_of(lambda: accel.fast_pathsum(a, alg, backend=b), args.repeat))
            print(f"{n:>7} {alg:>7} " + " ".join(f"{1e3 * t:>10.2f}" for t in row))


if __name__ == "__main__":
    main()
