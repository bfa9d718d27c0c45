#!/usr/bin/env python3
"""Timing comparison: compiled kernels vs the pure-numpy fallback.

Covers the two hot paths, the spin-chain Hamiltonian apply that dominates
Krylov propagation and the displacement-matrix fill behind the analytic
survival series, plus one end-to-end fidelity curve.

Run from the repo root after `python setup.py build_ext --inplace`:

    python benchmarks/bench_kernels.py
"""

import time
import timeit

import numpy as np

from fidecay import _slow

try:
    from fidecay import _fast
except ImportError:
    _fast = None

BACKENDS = [("python", _slow)] + ([("cython", _fast)] if _fast else [])


def bench(label, func, repeat=5, number=3):
    best = min(timeit.repeat(func, repeat=repeat, number=number)) / number
    print(f"  {label:<44s} {best * 1e3:9.3f} ms")
    return best


def main():
    if _fast is None:
        print("compiled extension not built; timing the fallback only\n")

    print("spin_apply (one Hamiltonian application)")
    rng = np.random.default_rng(0)
    for n_sites in (10, 12, 14):
        dim = 1 << n_sites
        psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi = np.ascontiguousarray(psi)
        times = {}
        for name, backend in BACKENDS:
            plan = backend.make_spin_plan(n_sites, 1.0, 0.3, -0.2, 1.0, 0.5, False)
            times[name] = bench(f"n_sites={n_sites} ({name})", lambda: backend.spin_apply(plan, psi))
        if len(times) == 2:
            print(f"    speedup: {times['python'] / times['cython']:.1f}x")

    print("\ndisplacement_matrix (full Fock block)")
    for size in (64, 128, 256):
        times = {}
        for name, backend in BACKENDS:
            times[name] = bench(
                f"size={size} ({name})", lambda: backend.displacement_matrix(1.3 + 0.4j, size)
            )
        if len(times) == 2:
            print(f"    speedup: {times['python'] / times['cython']:.1f}x")

    print("\nend-to-end: 200-point fidelity curve, 12-site critical chain")
    import os

    import fidecay
    from fidecay import SpinChainSpec, all_up_state, build_spin_hamiltonian, fidelity_curve
    from fidecay import default_time_grid, variance

    print(f"  active backend: {fidecay.kernels.BACKEND}"
          + ("" if not os.environ.get("FIDECAY_FORCE_PYTHON") else " (forced)"))
    op = build_spin_hamiltonian(SpinChainSpec(n_sites=12, coupling_zz=1.0, field_x=1.0))
    state = all_up_state(12)
    grid = default_time_grid(np.sqrt(variance(op, state)), 200, 1.7)
    start = time.perf_counter()
    fidelity_curve(op, state, grid, 1e-9)
    print(f"  wall time: {time.perf_counter() - start:.2f} s")
    print("\nrerun with FIDECAY_FORCE_PYTHON=1 to time the end-to-end fallback path")


if __name__ == "__main__":
    main()
