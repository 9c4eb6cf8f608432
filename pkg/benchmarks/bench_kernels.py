#!/usr/bin/env python3
"""Measure the exact-arithmetic kernels across the available backends.

Runs the same seeded workloads through every registered kernel backend
(the pure-Python reference and, when built, the compiled extension) and
prints best-of-N wall times side by side.  All numbers are measured on
the machine running the script; nothing here is precomputed.

Usage:
    python3 benchmarks/bench_kernels.py [--sizes 20,40,60] [--repeats 5]
                                        [--seed 0] [--prime 1000003]
                                        [--magnitude 1000] [--end-to-end]
"""

import argparse
import os
import random
import subprocess
import sys
import time

from fpt._kernels import backend_modules


def _int_matrix(rng, rows, cols, magnitude):
    return [[rng.randint(-magnitude, magnitude) for _ in range(cols)]
            for _ in range(rows)]


def _mod_matrix(rng, rows, cols, p):
    return [[rng.randrange(p) for _ in range(cols)] for _ in range(rows)]


def _best_of(repeats, fn, *args):
    best = None
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best


def _workloads(sizes, seed, prime, magnitude):
    """Yield (label, kernel_name, args) with inputs fixed across backends."""
    rng = random.Random(seed)
    for n in sizes:
        rows, cols = n, n + n // 2
        rect_int = _int_matrix(rng, rows, cols, magnitude)
        rect_mod = _mod_matrix(rng, rows, cols, prime)
        square_int = _int_matrix(rng, n, n, magnitude)
        square_mod = _mod_matrix(rng, n, n, prime)
        yield (f"rref_int  {rows}x{cols}", "rref_int", (rect_int,))
        yield (f"rref_mod  {rows}x{cols}", "rref_mod", (rect_mod, prime))
        yield (f"det_int   {n}x{n}", "det_int", (square_int,))
        yield (f"det_mod   {n}x{n}", "det_mod", (square_mod, prime))


def bench_kernels(sizes, repeats, seed, prime, magnitude):
    modules = backend_modules()
    names = [m.BACKEND for m in modules]
    width = max(len(label) for label, _, _ in
                _workloads(sizes, seed, prime, magnitude))
    header = f"{'workload':<{width}}" + "".join(f"  {n:>12}" for n in names)
    if len(modules) > 1:
        header += f"  {'ratio':>8}"
    print(header)
    print("-" * len(header))
    for label, kernel, args in _workloads(sizes, seed, prime, magnitude):
        times = []
        results = []
        for module in modules:
            fn = getattr(module, kernel)
            results.append(fn(*args))
            times.append(_best_of(repeats, fn, *args))
        first = results[0]
        for backend, result in zip(names[1:], results[1:]):
            if result != first:
                raise SystemExit(
                    f"backend disagreement on {label}: {names[0]} vs {backend}")
        row = f"{label:<{width}}" + "".join(f"  {t * 1000:>10.2f}ms" for t in times)
        if len(times) > 1 and times[1] > 0:
            row += f"  {times[0] / times[1]:>7.1f}x"
        print(row)


def bench_end_to_end(repeats):
    """Time the bundled verification once per backend in fresh processes."""
    print()
    print("end-to-end: fpt verify-paper --format json (fresh process, best "
          f"of {repeats})")
    code = ("import fpt.cli, sys;"
            "sys.exit(fpt.cli.main(['verify-paper', '--format', 'json',"
            " '--out', '/dev/null']))")
    for env_value, label in (("1", "pure"), ("", "default")):
        env = dict(os.environ)
        if env_value:
            env["FPT_PURE_PYTHON"] = env_value
        else:
            env.pop("FPT_PURE_PYTHON", None)
        best = None
        for _ in range(repeats):
            start = time.perf_counter()
            proc = subprocess.run([sys.executable, "-c", code], env=env,
                                  check=False)
            elapsed = time.perf_counter() - start
            if proc.returncode != 0:
                raise SystemExit(f"verification failed under {label} backend")
            best = elapsed if best is None else min(best, elapsed)
        print(f"  {label:>8}: {best:.2f}s")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="20,40,60",
                        help="comma-separated matrix sizes (default 20,40,60)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="best-of repetitions per measurement (default 5)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--prime", type=int, default=1000003,
                        help="modulus for the mod-p kernels")
    parser.add_argument("--magnitude", type=int, default=1000,
                        help="integer entries are drawn from [-M, M]")
    parser.add_argument("--end-to-end", action="store_true",
                        help="also time the bundled verification per backend")
    args = parser.parse_args(argv)

    sizes = [int(part) for part in args.sizes.split(",") if part]
    modules = backend_modules()
    print("backends: " + ", ".join(m.BACKEND for m in modules))
    if len(modules) == 1:
        print("note: compiled extension not built; timing the pure backend only")
    bench_kernels(sizes, args.repeats, args.seed, args.prime, args.magnitude)
    if args.end_to_end:
        bench_end_to_end(max(1, min(args.repeats, 3)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
