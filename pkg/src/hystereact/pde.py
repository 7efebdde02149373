"""IMEX finite differences for ``u_t = u_xx + v`` with zero-flux ends.

Diffusion is taken implicitly with weight ``theta`` (1/2 Crank-Nicolson,
1 backward Euler); the relay output ``v`` is frozen over each step at its
value from the start of the step, then the relays see the new ``u``.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainViolation
from .field import FieldState, Grid, advance_field, init_field
from .relay import Branch, BranchPair, switch_fractions
from .tridiag import Tridiagonal

DT_MIN = 1e-10
# smallest sub-step, as a fraction of dt, that switch sharpening may take
SHARPEN_MIN_FRACTION = 1e-3

COMPLETED = "completed"
TRANSVERSALITY_LOST = "transversality_lost"
DOMAIN_VIOLATION = "domain_violation"


@dataclass(frozen=True)
class SolverParams:
    grid: Grid = field(default_factory=lambda: Grid(400))
    dt: float = 1e-4
    T_end: float = 0.05
    theta: float = 0.5
    overshoot_policy: str = "halt"
    save_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.T_end < 0:
            raise ValueError("T_end must be nonnegative")
        if self.T_end > 0 and self.dt > self.T_end:
            raise ValueError("dt must not exceed T_end")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if self.overshoot_policy not in ("halt", "subdivide"):
            raise ValueError(f"unknown overshoot_policy {self.overshoot_policy!r}")
        if self.save_stride < 1:
            raise ValueError("save_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        if self.T_end == 0:
            return 0
        return max(1, int(math.ceil(self.T_end / self.dt - 1e-9)))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = {"n_cells": self.grid.n_cells}
        return d


@dataclass
class Trajectory:
    snapshots: list
    params: SolverParams
    status: str = COMPLETED
    wall_time: float = 0.0
    n_switches: int = 0
    branches: Optional[BranchPair] = None
    monitors: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.params.grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def u(self) -> np.ndarray:
        return np.array([s.u for s in self.snapshots])

    @property
    def v(self) -> np.ndarray:
        return np.array([s.v for s in self.snapshots])

    @property
    def track(self):
        for m in self.monitors:
            if hasattr(m, "track"):
                return m.track
        return None

    @property
    def final(self):
        return self.snapshots[-1]


def laplacian(u: np.ndarray, h: float) -> np.ndarray:
    """Second difference with mirrored ghost nodes at both ends."""
    out = np.empty_like(u)
    out[1:-1] = u[:-2] - 2.0 * u[1:-1] + u[2:]
    out[0] = 2.0 * (u[1] - u[0])
    out[-1] = 2.0 * (u[-2] - u[-1])
    return out / (h * h)


@lru_cache(maxsize=64)
def implicit_operator(n_cells: int, dt: float, theta: float) -> Tridiagonal:
    """Factored ``I - theta*dt*L``."""
    n = n_cells + 1
    r = theta * dt * n_cells * n_cells
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    diag = np.full(n, 1.0 + 2.0 * r)
    upper[0] = -2.0 * r
    lower[-1] = -2.0 * r
    return Tridiagonal(lower, diag, upper)


def diffuse(u: np.ndarray, source: np.ndarray, dt: float, theta: float, grid: Grid) -> np.ndarray:
    """One theta step of ``u_t = u_xx + source`` with the source held fixed."""
    rhs = u + dt * source
    if theta < 1.0:
        rhs = rhs + (1.0 - theta) * dt * laplacian(u, grid.h)
    return implicit_operator(grid.n_cells, dt, theta).solve(rhs)


def _plain_step(state, dt, params, branches):
    u_new = diffuse(state.u, state.v, dt, params.theta, params.grid)
    return advance_field(state, u_new, state.t + dt, branches)


def _sharpened_step(state, dt, params, branches):
    # land sub-steps on the interpolated switch times so v changes on step boundaries
    t_target = state.t + dt
    remaining = dt
    while remaining > 0:
        trial = diffuse(state.u, state.v, remaining, params.theta, params.grid)
        frac = switch_fractions(state.config, state.last_input, trial, branches)
        s = np.nanmin(frac) if np.any(~np.isnan(frac)) else np.nan
        sub = remaining if np.isnan(s) else s * remaining
        if np.isnan(s) or sub <= max(DT_MIN, SHARPEN_MIN_FRACTION * dt) or s >= 1.0 - 1e-12:
            return advance_field(state, trial, t_target, branches)
        u_sub = diffuse(state.u, state.v, sub, params.theta, params.grid)
        state = advance_field(state, u_sub, state.t + sub, branches)
        remaining = t_target - state.t
    return state


def step(state: FieldState, params: SolverParams, branches: BranchPair,
         dt: Optional[float] = None) -> FieldState:
    """Advance one time step (``params.dt`` unless ``dt`` is given)."""
    dt = params.dt if dt is None else dt
    if params.overshoot_policy == "halt":
        return _plain_step(state, dt, params, branches)
    try:
        return _sharpened_step(state, dt, params, branches)
    except DomainViolation:
        if dt / 2 < DT_MIN:
            raise
        half = step(state, params, branches, dt / 2)
        return step(half, params, branches, dt / 2)


def solve(phi, xi0, branches: BranchPair, params: SolverParams,
          monitors: Sequence = ()) -> Trajectory:
    """Integrate from ``phi`` to ``params.T_end``.

    Each monitor is called as ``monitor.start(state, params, branches)`` and
    then ``monitor(state)`` after every step; a non-None return value is a
    status that stops the run.
    """
    clock = time.perf_counter()
    state = init_field(phi, xi0, branches)
    traj = Trajectory([state], params, branches=branches, monitors=list(monitors))
    status = COMPLETED
    for m in monitors:
        status = m.start(state, params, branches) or status
    n = params.n_steps
    k = 0
    while k < n and status == COMPLETED:
        t_new = params.T_end if k == n - 1 else (k + 1) * params.dt
        try:
            new = step(state, params, branches, t_new - state.t)
        except DomainViolation as exc:
            status = DOMAIN_VIOLATION
            traj.meta["error"] = str(exc)
            break
        new.t = t_new
        traj.n_switches += int(np.count_nonzero(new.config != state.config))
        state = new
        k += 1
        for m in monitors:
            status = m(state) or status
        if k % params.save_stride == 0 or k == n or status != COMPLETED:
            traj.snapshots.append(state)
    traj.status = status
    traj.wall_time = time.perf_counter() - clock
    return traj


def reduce_general_rhs(f: Callable, branches: BranchPair) -> BranchPair:
    """Fold a right-hand side ``f(u, v)`` into the branches: ``F_j(u) = f(u, H_j(u))``."""
    H1, H2 = branches.H1, branches.H2
    F1 = Branch(lambda u: f(u, H1(u)), -math.inf, branches.beta, "F1")
    F2 = Branch(lambda u: f(u, H2(u)), branches.alpha, math.inf, "F2")
    return BranchPair(branches.alpha, branches.beta, F1, F2, branches.sigma)


# ---------------------------------------------------------------------------
# discrete heat kernel
# ---------------------------------------------------------------------------

@dataclass
class KernelReport:
    times: np.ndarray
    sup_values: np.ndarray
    scaled: np.ndarray
    bound_constant: float
    trend: float
    bounded: bool


TREND_TOL = 0.02


def kernel_fields(params: SolverParams, source_nodes, times: Sequence[float]) -> list:
    """Solutions of the homogeneous problem from unit-mass discrete deltas."""
    grid = params.grid
    nodes = np.atleast_1d(source_nodes)
    u = np.zeros(grid.size)
    for i in nodes:
        u[int(i)] += 1.0 / grid.h
    zero = np.zeros_like(u)
    t, out = 0.0, []
    for target in sorted(times):
        while target - t > 1e-12 * max(1.0, target):
            dt = min(params.dt, target - t)
            u = diffuse(u, zero, dt, params.theta, grid)
            t = t + dt if dt == params.dt else target
        out.append(u.copy())
    return out


def heat_kernel_bound_check(params: SolverParams, source_node, times: Sequence[float],
                            t_min: Optional[float] = None) -> KernelReport:
    """Measure ``sup_x |u(x, t)| * sqrt(t)`` for a discrete delta.

    ``bound_constant`` is the largest scaled value with ``t >= t_min``;
    ``trend`` is the log-log slope of the scaled values against ``t`` and the
    report calls the bound sustained when it stays below ``TREND_TOL``.
    """
    times = np.array(sorted(times), dtype=float)
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    fields = kernel_fields(params, source_node, times)
    sup = np.array([np.max(np.abs(f)) for f in fields])
    scaled = sup * np.sqrt(times)
    t_min = times[0] if t_min is None else t_min
    use = times >= t_min
    k1 = float(np.max(scaled[use]))
    trend = float(np.polyfit(np.log(times[use]), np.log(scaled[use]), 1)[0]) if use.sum() > 1 else 0.0
    return KernelReport(times, sup, scaled, k1, trend, trend <= TREND_TOL)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_trajectory_csv(path, traj: Trajectory) -> None:
    x = traj.grid.nodes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "u", "v", "config"])
        for s in traj.snapshots:
            cfg = getattr(s, "config", None)
            for i in range(x.size):
                c = int(cfg[i]) if cfg is not None else ""
                w.writerow([repr(float(s.t)), repr(float(x[i])), repr(float(s.u[i])),
                            repr(float(s.v[i])), c])


def run_summary(traj: Trajectory) -> dict:
    out = {
        "status": traj.status,
        "params": traj.params.as_dict(),
        "n_snapshots": len(traj.snapshots),
        "n_switches": traj.n_switches,
        "t_final": float(traj.final.t),
    }
    track = traj.track
    if track is not None:
        out["free_boundary"] = track.as_dict()
    out.update({k: v for k, v in traj.meta.items() if isinstance(v, (str, int, float))})
    return out


def write_summary_json(path, traj: Trajectory) -> None:
    with open(path, "w") as fh:
        json.dump(run_summary(traj), fh, indent=2, sort_keys=True)
        fh.write("\n")
