"""Grid refinement of the prototype run: Cauchy differences and b(T).

    python scripts/refinement_study.py --grids 100 200 400 800 1600
"""

import argparse

import numpy as np

from hystereact import FreeBoundaryMonitor, Grid, SolverParams, cubic_branch_pair, solve, step_config


def run(br, n, dt, T):
    g = Grid(n)
    phi = br.alpha + 0.6 * (g.nodes - 0.4)
    return solve(phi, step_config(g, 0.4), br, SolverParams(g, dt, T), [FreeBoundaryMonitor(0.4)])


def cauchy(coarse, fine):
    r = fine.grid.n_cells // coarse.grid.n_cells
    by_t = {round(s.t, 12): s for s in fine.snapshots}
    return max(float(np.max(np.abs(s.u - by_t[round(s.t, 12)].u[::r]))) for s in coarse.snapshots)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--T", type=float, default=0.05)
    args = ap.parse_args()

    br = cubic_branch_pair()
    runs = [run(br, n, args.dt, args.T) for n in args.grids]
    print(f"{'N':>6} {'b(T)':>12} {'sup|u_N - u_2N|':>16} {'ratio':>7}")
    prev = None
    for k, r in enumerate(runs):
        d = cauchy(r, runs[k + 1]) if k + 1 < len(runs) else None
        ratio = f"{prev / d:7.2f}" if prev and d else ""
        print(f"{r.grid.n_cells:6d} {r.track.b_values[-1]:12.7f} {'' if d is None else f'{d:16.3e}'} {ratio}")
        prev = d


if __name__ == "__main__":
    main()
