"""Prototype run on cubic branches: free boundary track and final profile.

    python scripts/run_prototype.py --n-cells 400 --out out/prototype
"""

import argparse
from pathlib import Path

import numpy as np

from hystereact import FreeBoundaryMonitor, Grid, SolverParams, cubic_branch_pair, solve, step_config
from hystereact.pde import write_summary_json, write_trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=400)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--abar", type=float, default=0.4)
    ap.add_argument("--out", default="out/prototype")
    args = ap.parse_args()

    br = cubic_branch_pair()
    g = Grid(args.n_cells)
    phi = br.alpha + 0.6 * (g.nodes - args.abar)
    mon = FreeBoundaryMonitor(args.abar)
    traj = solve(phi, step_config(g, args.abar), br, SolverParams(g, args.dt, args.T, save_stride=10), [mon])

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "traj.csv", traj)
    mon.track.write_csv(out / "track.csv")
    write_summary_json(out / "summary.json", traj)

    print(f"status {traj.status}, {traj.n_switches} switches")
    for t in np.linspace(0, args.T, 6):
        print(f"t={t:.3f}  b={mon.track.b_at(float(t)):.6f}")


if __name__ == "__main__":
    main()
