"""Slow-fast runs against their hysteresis limit for decreasing epsilon.

    python scripts/epsilon_sweep.py --n-cells 400 --eps 1e-1 3e-2 1e-2 3e-3 1e-3 3e-4
"""

import argparse

import numpy as np

from hystereact import Grid, SolverParams, step_config
from hystereact.slowfast import (
    compare_to_hysteresis, cubic_model, detect_folds, extract_branches, solve_hysteresis_limit,
    solve_slowfast,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-cells", type=int, default=400)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    args = ap.parse_args()

    model = cubic_model()
    detect_folds(model)
    br = extract_branches(model)
    g = Grid(args.n_cells)
    params = SolverParams(g, args.dt, args.T)
    phi = br.alpha + 0.6 * (g.nodes - 0.4)
    xi0 = step_config(g, 0.4)
    f = lambda u, v: v
    hyst = solve_hysteresis_limit(phi, xi0, br, f, params)

    print(f"{'eps':>8} {'sup_dev_u':>11} {'sup_dev_v':>10} {'argmax x':>9} {'switched':>9}")
    for eps in args.eps:
        slow = solve_slowfast(phi, br.evaluate(xi0, phi), model, f, eps, params)
        rep = compare_to_hysteresis(slow, hyst)
        dev = np.max(np.abs(slow.u - hyst.u), axis=0)
        switched = int(np.sum(~np.isnan(rep.switch_time_offsets)))
        print(f"{eps:8.0e} {rep.sup_dev_u:11.3e} {rep.sup_dev_v:10.3e} {g.nodes[np.argmax(dev)]:9.4f} {switched:9d}")


if __name__ == "__main__":
    main()
