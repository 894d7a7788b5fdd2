"""Benchmark the compiled Jost propagation kernel against the numpy fallback.

Run as ``python3 -m kdvlab.benchmark``.  Both code paths advance the same
Jost-function recursion across every grid cell for a batch of wavenumbers;
the compiled kernel is used by default whenever the extension module built.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from .grid import SpatialGrid
from .scattering import (
    HAVE_COMPILED_KERNEL,
    propagate_compiled,
    propagate_fallback,
)
from .soliton import SolitonConfig, eval_multisoliton


def _setup(n_k: int, grid: SpatialGrid):
    """Potential samples at the two Gauss points and a wavenumber batch."""
    config = SolitonConfig((2.0, 1.0), (0.0, 0.0))
    u = eval_multisoliton(config, grid).values
    ua = np.ascontiguousarray(u[:-1])
    ub = np.ascontiguousarray(u[1:])
    k = np.linspace(0.1, 20.0, n_k)
    ksq = np.ascontiguousarray((k**2).astype(complex))
    return ua, ub, grid.spacing, ksq


def _time(func, ua, ub, h, ksq, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        f = np.ones_like(ksq)
        g = 1j * np.sqrt(ksq)
        start = time.perf_counter()
        func(ua, ub, h, ksq, f, g)
        best = min(best, time.perf_counter() - start)
    return best


def run(n_k: int = 512, points: int = 4096, repeats: int = 5) -> dict:
    """Time both propagation paths; returns timings and the max deviation."""
    grid = SpatialGrid(40.0, points)
    ua, ub, h, ksq = _setup(n_k, grid)

    f1 = np.ones_like(ksq)
    g1 = 1j * np.sqrt(ksq)
    propagate_fallback(ua, ub, h, ksq, f1, g1)
    results = {"fallback": _time(propagate_fallback, ua, ub, h, ksq, repeats)}

    if HAVE_COMPILED_KERNEL:
        f2 = np.ones_like(ksq)
        g2 = 1j * np.sqrt(ksq)
        propagate_compiled(ua, ub, h, ksq, f2, g2)
        results["compiled"] = _time(propagate_compiled, ua, ub, h, ksq, repeats)
        scale = np.max(np.abs(f1))
        results["max_deviation"] = float(np.max(np.abs(f1 - f2)) / scale)
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Time Jost propagation: compiled kernel vs numpy fallback."
    )
    parser.add_argument("--nk", type=int, default=512,
                        help="number of wavenumbers in the batch")
    parser.add_argument("--points", type=int, default=4096,
                        help="grid points (power of two)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats; the best run is reported")
    args = parser.parse_args(argv)

    results = run(args.nk, args.points, args.repeats)
    print(f"batch: {args.nk} wavenumbers x {args.points - 1} cells")
    print(f"fallback (numpy):  {results['fallback'] * 1e3:9.2f} ms")
    if "compiled" in results:
        speedup = results["fallback"] / results["compiled"]
        print(f"compiled (cython): {results['compiled'] * 1e3:9.2f} ms"
              f"  ({speedup:.1f}x speedup)")
        print(f"max relative deviation: {results['max_deviation']:.3e}")
    else:
        print("compiled kernel not available; fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
