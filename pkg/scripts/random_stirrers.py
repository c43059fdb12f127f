#!/usr/bin/env python3
"""Time the solver on a field of randomly placed rotating/translating disks.

Places the disks on a jittered square lattice so they never overlap, draws
velocities on the unit circle and circulations in [-1, 1], solves, and
reports the GMRES iteration count, the boundary-condition residual, and the
wall-clock time.  With --grid the stream function is written next to the
script output for rendering with plotview.

Example:
    python scripts/random_stirrers.py --count 100 --backend dense
    python scripts/random_stirrers.py --count 1000 --backend treecode
"""

import argparse
import time

import numpy as np

from stirflow import (CurveSpec, DomainSpec, GridSpec, SolverOptions,
                      StirrerProblem, discretize, gridio, solve_flow,
                      streamfunction_grid)


def random_disks(count, seed):
    rng = np.random.default_rng(seed)
    side = int(np.ceil(np.sqrt(count)))
    curves, U, chi = [], [], []
    for j in range(count):
        c = (j % side) + 1j * (j // side) + 0.15 * (
            rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        curves.append(CurveSpec.circle(c, rng.uniform(0.1, 0.22)))
        U.append(np.exp(2j * np.pi * rng.random()))
        chi.append(rng.uniform(-1, 1))
    dom = DomainSpec(False, tuple(curves))
    return StirrerProblem(dom, U=tuple(U), chi=tuple(chi)), side


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--n", type=int, default=256, help="nodes per disk")
    ap.add_argument("--backend", choices=("dense", "treecode"),
                    default="dense")
    ap.add_argument("--seed", type=int, default=17)
    ap.add_argument("--grid", metavar="PATH",
                    help="also write the stream function grid here")
    args = ap.parse_args()

    problem, side = random_disks(args.count, args.seed)
    b = discretize(problem.domain, args.n)
    print(f"{args.count} disks, {b.total} nodes, backend={args.backend}")

    t0 = time.perf_counter()
    sol = solve_flow(problem, b, SolverOptions(backend=args.backend))
    elapsed = time.perf_counter() - t0
    vals = (sol.sys.A * sol.rh.f_boundary).real - sol.rh.gamma
    residual = max(
        float(np.abs(vals[sl] - vals[sl].mean()).max())
        for sl in (b.curve_slice(j) for j in range(b.ncurves)))
    print(f"solve: {elapsed:.2f} s, {sol.rh.gmres_iterations} GMRES "
          f"iterations, boundary residual {residual:.3e}")

    if args.grid:
        pad = 1.0
        spec = GridSpec(-pad, side + pad, -pad, side + pad, 400, 400)
        grid = streamfunction_grid(sol, spec)
        gridio.write_grid(args.grid, "psi",
                          (spec.xmin, spec.xmax, spec.ymin, spec.ymax),
                          grid.psi)
        print(f"wrote {args.grid}")


if __name__ == "__main__":
    main()
