"""Benchmark the table-encoded matrix kernels: numba jit vs pure numpy.

Kernel microbenchmarks run both implementations in one process; pass
--full to also time an end-to-end scenario run per backend (selected via
the CHEVNET_BACKEND environment variable in subprocesses).

    python benchmarks/bench_kernels.py [--full]
"""

import argparse
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from chevnet import _kernels as K
from chevnet.chevalg import compute_structure_constants
from chevnet.ringkit import zmod
from chevnet.rootsys import from_name

REPEAT = 5


def timeit(fn, *args, repeat=REPEAT):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workload(system: str, batch: int):
    rs = from_name(system)
    sc = compute_structure_constants(rs)
    ring = zmod(4)
    rng = np.random.default_rng(0)
    d = sc.dim
    # realistic matrices: adjoint generators, then random products of them
    gens = [sc.template(r).evaluate(ring, xi) for r in range(rs.nroots)
            for xi in (1, 2, 3)]
    mats = np.stack([gens[i % len(gens)] for i in range(batch)])
    shuffle = rng.permutation(batch)
    mats = np.ascontiguousarray(mats[shuffle])
    g = gens[0]
    v = np.zeros(d, dtype=np.int32)
    v[d // 2] = 1
    return ring, g, mats, v


def run_kernel_bench():
    rows = []
    for system, batch in [("A2", 4096), ("A3", 4096)]:
        ring, g, mats, v = workload(system, batch)
        cases = [
            ("matmul x1000", lambda impl: [impl.matmul(g, g, ring.add, ring.mul)
                                           for _ in range(1000)]),
            (f"left_batch[{batch}]",
             lambda impl: impl.matmul_left_batch(g, mats, ring.add, ring.mul)),
            (f"right_batch[{batch}]",
             lambda impl: impl.matmul_right_batch(mats, g, ring.add, ring.mul)),
            (f"matvec[{batch}]",
             lambda impl: impl.matvec_batch(mats, v, ring.add, ring.mul)),
        ]
        for label, fn in cases:
            t_np = timeit(fn, K.numpy_impl)
            if K.numba_impl is not None:
                fn(K.numba_impl)  # warm the jit cache
                t_nb = timeit(fn, K.numba_impl)
            else:
                t_nb = float("nan")
            rows.append((f"{system} {label}", t_np, t_nb))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for label, t_np, t_nb in rows:
        speed = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{label:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms"
              f"  {speed:>7.1f}x")


def run_full_bench():
    scenario = Path(__file__).parent.parent / "scenarios" / "S1.json"
    print("\nend-to-end: chevnet verify scenarios/S1.json")
    for backend in ("numba", "numpy"):
        if backend == "numba" and not K.NUMBA_AVAILABLE:
            print("  numba  unavailable")
            continue
        env = dict(os.environ, CHEVNET_BACKEND=backend)
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "chevnet.cli", "verify",
                               str(scenario)], env=env, capture_output=True,
                              text=True)
        dt = time.perf_counter() - t0
        status = "ok" if proc.returncode == 0 else f"exit {proc.returncode}"
        print(f"  {backend:<6} {dt:7.2f}s  ({status})")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true",
                    help="also time a whole scenario per backend")
    args = ap.parse_args()
    print(f"active backend: {K.BACKEND} (numba available: {K.NUMBA_AVAILABLE})")
    run_kernel_bench()
    if args.full:
        run_full_bench()
