"""Benchmark: compiled integrator kernel vs the pure-Python twin.

Usage: python benchmarks/bench_kernels.py [--t-end 200] [--repeat 5]

Also re-verifies that the two backends agree bit-for-bit on the benchmark
trajectory (they share the exact arithmetic; the extension is compiled
with -ffp-contract=off).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from rossler_knots.integrator import available_backends

CASES = [
    ("chaotic tol=1e-9", (0.2, 0.03513102417050051, 5.6929737951659,
                          0.0, -5.0, 0.02), 1e-9),
    ("chaotic tol=1e-12", (0.2, 0.03513102417050051, 5.6929737951659,
                           0.0, -5.0, 0.02), 1e-12),
    ("mild tol=1e-9", (0.5, 0.5, 2.0, 0.3, -0.3, 0.1), 1e-9),
]


def run(kernel, case, t_end):
    (a, b, c, x, y, z), tol = case[1], case[2]
    return kernel.integrate_raw(a, b, c, x, y, z, t_end, tol, 1.0,
                                1e4, 1e-12, 50_000_000, 0.0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--t-end", type=float, default=200.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    if "compiled" not in backends:
        print("compiled kernel not built; benchmarking the python kernel only")

    print(f"{'case':24s} {'backend':9s} {'steps':>8s} {'best ms':>9s} {'us/step':>8s}")
    for case in CASES:
        results = {}
        for name, kernel in backends.items():
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                status, (ts, ys, qs, hs) = run(kernel, case, args.t_end)
                best = min(best, time.perf_counter() - t0)
            results[name] = (best, len(hs), (ts, ys, qs, hs))
            print(f"{case[0]:24s} {name:9s} {len(hs):8d} {best * 1e3:9.2f} "
                  f"{best / max(len(hs), 1) * 1e6:8.2f}")
        if len(results) == 2:
            (t_py, _, out_py) = results["python"]
            (t_c, _, out_c) = results["compiled"]
            identical = all(np.array_equal(a, b) for a, b in zip(out_py, out_c))
            print(f"{'':24s} speedup {t_py / t_c:5.1f}x   bit-identical: {identical}")
    print()


if __name__ == "__main__":
    main()
