"""Switch delay of a single slow-fast relay driven by the ramp u = t.

Compares the midline crossing of ``v`` with the switch at ``u = beta`` and
with a Radau solution of the scalar equation ``eps v' = t + v - v**3``.

    python scripts/ramp_delay.py --eps 1e-1 1e-2 1e-3 1e-4
"""

import argparse

import numpy as np
from scipy.integrate import solve_ivp

from hystereact import Grid, SolverParams
from hystereact.slowfast import cubic_model, detect_folds, extract_branches, first_crossings, solve_slowfast


def radau_crossing(eps):
    def hit(t, y):
        return y[0]
    hit.terminal, hit.direction = True, 1
    sol = solve_ivp(lambda t, y: [(t + y[0] - y[0] ** 3) / eps], (0, 1), [-1.0], method="Radau",
                    rtol=1e-11, atol=1e-13, events=hit, jac=lambda t, y: [[(1 - 3 * y[0] ** 2) / eps]])
    return sol.t_events[0][0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3, 1e-4])
    ap.add_argument("--dt", type=float, default=2e-5)
    args = ap.parse_args()

    model = cubic_model()
    detect_folds(model)
    br = extract_branches(model)
    u0 = np.zeros(2)
    one = lambda u, v: np.ones_like(u)
    print(f"{'eps':>8} {'t_cross':>10} {'offset':>9} {'radau':>9} {'offset/eps^(2/3)':>17}")
    for eps in args.eps:
        traj = solve_slowfast(u0, br.H1(u0), model, one, eps, SolverParams(Grid(1), args.dt, 1.0))
        t = first_crossings(traj.times, traj.v, 0.0)[0]
        off = t - br.beta
        print(f"{eps:8.0e} {t:10.6f} {off:9.6f} {radau_crossing(eps) - br.beta:9.6f} {off / eps ** (2 / 3):17.3f}")


if __name__ == "__main__":
    main()
