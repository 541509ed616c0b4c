#!/usr/bin/env python3
"""Time the numba and numpy backends of the batch kernels on the same inputs.

Covers the encoding-search grid (the hot loop of ``encoder.optimize``) and
the singlet-fraction overlap grid. Each case checks that both backends
agree before it reports timings.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --grid 6 8 10 --repeats 5
    python3 benchmarks/bench_kernels.py --output bench.json
"""
import argparse
import json
import time

import numpy as np

from lucorr import channels, kernels, states
from lucorr._accel import NUMBA_AVAILABLE, set_backend


def _time(fn, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def encoding_case(grid_points, n_p, code):
    g = 2 * np.pi * np.arange(grid_points) / grid_points
    grid = np.array(np.meshgrid(g, g, g, g, indexing="ij")).reshape(4, -1).T
    z = np.zeros((grid.shape[0], 1))
    u1 = states.euler_unitaries(np.hstack([z, grid[:, :2]]))
    u2 = states.euler_unitaries(np.hstack([z, grid[:, 2:]]))
    ks = kernels.stack_kraus([channels.amplitude_damping(p) for p in np.linspace(0, 1, n_p)])
    psi = states.bell_phi_plus()
    return lambda: kernels.encoded_measures(psi, u1, u2, ks, ks, code), grid.shape[0] * n_p


def overlap_case(grid_points):
    g = 2 * np.pi * np.arange(grid_points) / grid_points
    grid = np.array(np.meshgrid(g, g, g, indexing="ij")).reshape(3, -1).T
    us = states.euler_unitaries(grid)
    rho = states.random_density_matrix(2, np.random.default_rng(0))
    return lambda: kernels.bell_overlaps(rho, us), grid.shape[0]


def run(grid_sizes, n_p, repeats):
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    results = []
    cases = []
    for gp in grid_sizes:
        for name, code in (
            ("concurrence", kernels.CONCURRENCE),
            ("negativity", kernels.NEGATIVITY),
            ("T_S", kernels.TOTAL_CORRELATIONS),
        ):
            fn, work = encoding_case(gp, n_p, code)
            cases.append((f"encoded_measures[{name}] grid={gp}^4 p={n_p}", fn, work))
        fn, work = overlap_case(3 * gp)
        cases.append((f"bell_overlaps grid={3 * gp}^3", fn, work))

    if "numba" in backends:
        # compile outside the timed region
        set_backend("numba")
        for _, fn, _ in cases:
            fn()

    for label, fn, work in cases:
        row = {"case": label, "evaluations": work}
        outs = {}
        for b in backends:
            prev = set_backend(b)
            try:
                row[f"{b}_s"], outs[b] = _time(fn, repeats)
            finally:
                set_backend(prev)
        if len(outs) == 2:
            row["max_abs_diff"] = float(np.max(np.abs(outs["numba"] - outs["numpy"])))
            row["speedup"] = row["numpy_s"] / row["numba_s"]
        results.append(row)
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, nargs="+", default=[6, 8])
    ap.add_argument("--n-p", type=int, default=11)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--output", help="write results as JSON")
    args = ap.parse_args()

    results = run(args.grid, args.n_p, args.repeats)
    for r in results:
        line = f"{r['case']:<45} numpy {r['numpy_s'] * 1e3:9.2f} ms"
        if "numba_s" in r:
            line += f"  numba {r['numba_s'] * 1e3:9.2f} ms  x{r['speedup']:6.1f}  diff {r['max_abs_diff']:.1e}"
        print(line)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(results, fh, indent=2)


if __name__ == "__main__":
    main()
