"""Slow-fast bistable systems and their hysteresis limit.

The system is ``u_t = u_xx + f(u, v)``, ``eps * v_t = g(u, v)`` with an
S-shaped nullcline ``g = 0``.  Its two outer branches are stable for the
fast flow and play the role of ``H1`` (below ``beta``) and ``H2`` (above
``alpha``); the folds terminating them are where the branches lose
Lipschitz continuity.

Orientation used throughout: along a vertical line ``u = const`` the fast
flow pushes ``v`` up towards the branch from below, i.e. ``g > 0`` just
below an outer branch and ``gv < 0`` on it.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import comb

from .errors import (
    ContinuationStall, FoldCountMismatch, GridMismatch, NewtonDivergence, WindowEmpty,
)
from .field import FieldState
from .pde import COMPLETED, SolverParams, Trajectory, diffuse, reduce_general_rhs, solve
from .relay import (
    LOWER_CUTOFF_ALPHA, UPPER_CUTOFF_BETA, Branch, BranchPair, verify_branch_condition,
)

FD_STEP = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
FALLBACK_SUBSTEPS = 10
TOL_FOLD = 1e-7
FOLD_FD_FRACTION = 1e-3
MAX_FOLD_ORDER = 8
CLUSTER_RATIO = 0.9
DS_MIN = 1e-10
BISECT_TOL = 1e-12


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass
class Folds:
    """Fold data of an S-shaped nullcline.

    ``A = (alpha, vA)`` ends ``H2`` and ``B = (beta, vB)`` ends ``H1``.
    ``dir_A`` is the sign of ``v - vA`` along ``H2`` (likewise ``dir_B``).
    """

    alpha: float
    beta: float
    A: tuple
    B: tuple
    n: int
    dir_A: int
    dir_B: int

    @property
    def v_mid(self) -> float:
        """Midline between the fold ordinates, crossed by every fast transit."""
        return 0.5 * (self.A[1] + self.B[1])


@dataclass
class NullclineModel:
    """Smooth ``g(u, v)`` with optional analytic partial derivatives.

    ``g``, ``gu`` and ``gv`` must accept numpy arrays.  ``dv_k(k, u, v)``
    optionally returns the ``k``-th partial derivative in ``v``; without it
    fold orders are estimated by finite differences.
    """

    g: Callable
    gu: Optional[Callable] = None
    gv: Optional[Callable] = None
    dv_k: Optional[Callable] = None
    detected: Optional[Folds] = None

    def dg_du(self, u, v):
        if self.gu is not None:
            return self.gu(u, v)
        return (self.g(u + FD_STEP, v) - self.g(u - FD_STEP, v)) / (2 * FD_STEP)

    def dg_dv(self, u, v):
        if self.gv is not None:
            return self.gv(u, v)
        return (self.g(u, v + FD_STEP) - self.g(u, v - FD_STEP)) / (2 * FD_STEP)

    def solve_u(self, v, u0=0.0):
        """``u`` with ``g(u, v) = 0`` by Newton from ``u0`` (vectorized)."""
        v = np.asarray(v, dtype=float)
        u = np.broadcast_to(np.asarray(u0, dtype=float), v.shape).copy()
        for _ in range(NEWTON_MAXIT):
            du = self.g(u, v) / self.dg_du(u, v)
            u = u - du
            if not np.all(np.isfinite(u)):
                break
            if np.all(np.abs(du) <= NEWTON_TOL * np.maximum(1.0, np.abs(u))):
                return u if u.ndim else float(u)
        raise NewtonDivergence("no convergence solving g(u, v) = 0 for u")

    def solve_v(self, u, v0):
        """``v`` with ``g(u, v) = 0`` by Newton from ``v0`` (vectorized)."""
        u = np.asarray(u, dtype=float)
        v = np.broadcast_to(np.asarray(v0, dtype=float), u.shape).copy()
        for _ in range(NEWTON_MAXIT):
            dv = self.g(u, v) / self.dg_dv(u, v)
            v = v - dv
            if not np.all(np.isfinite(v)):
                break
            if np.all(np.abs(dv) <= NEWTON_TOL * np.maximum(1.0, np.abs(v))):
                return v if v.ndim else float(v)
        raise NewtonDivergence("no convergence solving g(u, v) = 0 for v")


def cubic_model() -> NullclineModel:
    """``g(u, v) = u + v - v**3``."""
    return NullclineModel(
        g=lambda u, v: u + v - v ** 3,
        gu=lambda u, v: np.ones_like(np.asarray(v, dtype=float)),
        gv=lambda u, v: 1.0 - 3.0 * v ** 2,
    )


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------

def _dv_fd(model: NullclineModel, k: int, u: float, v: float, h: float) -> float:
    j = np.arange(k + 1)
    pts = v + (k / 2 - j) * h
    w = (-1.0) ** j * comb(k, j)
    return float(np.sum(w * model.g(np.full(k + 1, u), pts)) / h ** k)


def fold_order(model: NullclineModel, u: float, v: float, h: float,
               tol: float = TOL_FOLD) -> int:
    """First ``k >= 2`` with ``|d^k g / dv^k| > tol`` at ``(u, v)``.

    Finite-difference estimates must also be stable under halving the
    resolution (``|D(h)| > 10 |D(h) - D(2h)|``) so that round-off and
    truncation noise is not mistaken for a nonzero derivative.
    """
    for k in range(2, MAX_FOLD_ORDER + 1):
        if model.dv_k is not None:
            if abs(model.dv_k(k, u, v)) > tol:
                return k
            continue
        d1, d2 = _dv_fd(model, k, u, v, h), _dv_fd(model, k, u, v, 2 * h)
        if abs(d1) > tol and abs(d1) > 10 * abs(d1 - d2):
            return k
    raise FoldCountMismatch(f"no nonzero v-derivative up to order {MAX_FOLD_ORDER} at a fold")


def detect_folds(model: NullclineModel, v_range=(-3.0, 3.0), samples: int = 2001) -> Folds:
    """Locate the two folds of ``g = 0`` by parametrizing the curve by ``v``.

    The folds are the sign changes of ``du/dv = -gv/gu`` along the curve,
    refined by bisection to ``1e-12``.  Stores and returns the result.
    """
    v = np.linspace(v_range[0], v_range[1], samples)
    u = np.empty_like(v)
    guess = 0.0
    for i, vi in enumerate(v):
        u[i] = guess = model.solve_u(vi, guess)

    def slope(vv, uu):
        return -model.dg_dv(uu, vv) / model.dg_du(uu, vv)

    s = slope(v, u)
    nz = np.flatnonzero(s != 0)  # a fold may sit exactly on a sample
    flips = np.flatnonzero(np.sign(s[nz[:-1]]) != np.sign(s[nz[1:]]))
    if flips.size != 2:
        raise FoldCountMismatch(f"expected 2 folds in v-range, found {flips.size}")
    pts = []
    for k in flips:
        i, j = nz[k], nz[k + 1]
        lo, hi, s_lo = v[i], v[j], s[i]
        u_guess = u[i]
        while hi - lo > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            u_guess = model.solve_u(mid, u_guess)
            if np.sign(slope(mid, u_guess)) == np.sign(s_lo):
                lo = mid
            else:
                hi = mid
        vf = 0.5 * (lo + hi)
        pts.append((float(model.solve_u(vf, u_guess)), float(vf)))
    (uA, vA), (uB, vB) = sorted(pts)
    if not uA < uB:
        raise FoldCountMismatch("folds do not bracket a bistable range")
    for uf, vf in ((uA, vA), (uB, vB)):
        if abs(model.dg_dv(uf, vf)) >= TOL_FOLD or abs(model.dg_du(uf, vf)) <= TOL_FOLD:
            raise FoldCountMismatch(f"point ({uf}, {vf}) is not a regular fold")
    h = FOLD_FD_FRACTION * (uB - uA)
    nA, nB = fold_order(model, uA, vA, h), fold_order(model, uB, vB, h)
    if nA != nB or nA % 2:
        raise FoldCountMismatch(f"fold orders {nA}, {nB}: need equal even orders")
    # the outer branches leave each fold away from the other fold
    folds = Folds(uA, uB, (uA, vA), (uB, vB), nA,
                  int(np.sign(vA - vB)), int(np.sign(vB - vA)))
    model.detected = folds
    return folds


# ---------------------------------------------------------------------------
# branch tables
# ---------------------------------------------------------------------------

@dataclass
class BranchTable:
    """Outer branch stored as ``u(v)`` with exact slopes, inverted on demand.

    Between nodes ``u`` is the cubic Hermite interpolant in ``v``; this
    stays smooth through the fold where ``v(u)`` has an infinite slope.
    """

    v: np.ndarray
    u: np.ndarray
    dudv: np.ndarray

    def __post_init__(self):
        if self.u[-1] < self.u[0]:
            self.v, self.u, self.dudv = self.v[::-1], self.u[::-1], self.dudv[::-1]
        mono = np.maximum.accumulate(self.u)
        if np.max(mono - self.u) > 1e-12 * max(1.0, float(np.max(np.abs(self.u)))):
            raise ContinuationStall("branch table is not monotone in u")
        self.u = mono  # rounding-level dips right at a flat fold

    @property
    def lo(self) -> float:
        return float(self.u[0])

    @property
    def hi(self) -> float:
        return float(self.u[-1])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        q = np.atleast_1d(u)
        i = np.clip(np.searchsorted(self.u, q, side="right") - 1, 0, self.u.size - 2)
        u0, u1 = self.u[i], self.u[i + 1]
        dv = self.v[i + 1] - self.v[i]
        m0, m1 = self.dudv[i] * dv, self.dudv[i + 1] * dv
        # safeguarded Newton on the Hermite cubic, bracket [a, b] in s
        a, b = np.zeros_like(q), np.ones_like(q)
        s = np.clip((q - u0) / np.where(u1 > u0, u1 - u0, 1.0), 0.0, 1.0)
        for _ in range(60):
            p = (u0 * (1 + 2 * s) * (1 - s) ** 2 + m0 * s * (1 - s) ** 2
                 + u1 * s * s * (3 - 2 * s) + m1 * s * s * (s - 1)) - q
            dp = 6 * s * (1 - s) * (u1 - u0) + m0 * (1 - s) * (1 - 3 * s) + m1 * s * (3 * s - 2)
            a = np.where(p < 0, s, a)
            b = np.where(p < 0, b, s)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = p / dp
            done = (p == 0) | (np.abs(step) <= 1e-13)
            if np.all(done):
                break
            s_new = s - step
            bad = ~((s_new > a) & (s_new < b))
            s = np.where(done, s, np.where(bad, 0.5 * (a + b), s_new))
        out = self.v[i] + s * dv
        return float(out[0]) if scalar else out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v"])
            for uu, vv in zip(self.u, self.v):
                w.writerow([repr(float(uu)), repr(float(vv))])


def _continue_branch(model: NullclineModel, start, direction: int, u_stop: float,
                     ds_max: float) -> BranchTable:
    """Pseudo-arclength continuation of ``g = 0`` from a fold until ``u`` reaches ``u_stop``."""
    x = np.array(start, dtype=float)
    tan = np.array([0.0, float(direction)])
    going_up = u_stop > x[0]
    pts = [x.copy()]
    ds = ds_max * 1e-3
    while True:
        n = np.array([-model.dg_dv(*x), model.dg_du(*x)], dtype=float)
        n /= np.hypot(*n)
        tan = n if n @ tan >= 0 else -n
        while True:
            p = x + ds * tan
            y = p.copy()
            for _ in range(20):
                gu, gv = model.dg_du(*y), model.dg_dv(*y)
                J = np.array([[gu, gv], [tan[0], tan[1]]])
                r = np.array([model.g(*y), tan @ (y - p)])
                try:
                    dy = np.linalg.solve(J, -r)
                except np.linalg.LinAlgError:
                    dy = np.array([np.nan, np.nan])
                y = y + dy
                if not np.all(np.isfinite(y)):
                    break
                if np.max(np.abs(dy)) <= NEWTON_TOL:
                    break
            else:
                y = np.array([np.nan, np.nan])
            if np.all(np.isfinite(y)) and abs(model.g(*y)) <= 1e-10:
                break
            ds /= 2
            if ds < DS_MIN:
                raise ContinuationStall(f"continuation stalled near ({x[0]}, {x[1]})")
        if (y[0] - x[0]) * (1 if going_up else -1) < -1e-12 * max(1.0, abs(x[0])):
            raise ContinuationStall("branch turned back: more than two folds")
        if (y[0] - u_stop) * (1 if going_up else -1) >= 0:
            pts.append(np.array([u_stop, model.solve_v(u_stop, y[1])]))
            break
        pts.append(y)
        x = y
        ds = min(ds / CLUSTER_RATIO, ds_max)
    arr = np.array(pts)
    gu, gv = model.dg_du(arr[:, 0], arr[:, 1]), model.dg_dv(arr[:, 0], arr[:, 1])
    dudv = -np.asarray(gv, dtype=float) / np.asarray(gu, dtype=float)
    dudv[0] = 0.0  # fold node: du/dv vanishes exactly
    return BranchTable(arr[:, 1].copy(), arr[:, 0].copy(), dudv)


def extract_branches(model: NullclineModel, u_range=(-1.0, 1.0),
                     resolution: int = 200) -> BranchPair:
    """Tabulate the outer branches: ``H1`` on ``[u_lo, beta]``, ``H2`` on ``[alpha, u_hi]``."""
    folds = model.detected or detect_folds(model)
    u_lo, u_hi = u_range
    if not (u_lo < folds.beta and u_hi > folds.alpha):
        raise ValueError("u_range must reach below beta and above alpha")
    ds_max = (u_hi - u_lo) / resolution
    t2 = _continue_branch(model, folds.A, folds.dir_A, u_hi, ds_max)
    t1 = _continue_branch(model, folds.B, folds.dir_B, u_lo, ds_max)
    H1 = Branch(t1, t1.lo, folds.beta, "H1")
    H2 = Branch(t2, folds.alpha, t2.hi, "H2")
    return BranchPair(folds.alpha, folds.beta, H1, H2, sigma=(folds.n - 1) / folds.n)


def branch_table_checks(model: NullclineModel, branches: BranchPair) -> dict:
    """Residual, orientation and fast-flow stability of the tabulated branches."""
    out = {"max_residual": 0.0, "orientation_ok": True, "stable_ok": True}
    for tab in (branches.H1.func, branches.H2.func):
        res = np.max(np.abs(model.g(tab.u, tab.v)))
        out["max_residual"] = max(out["max_residual"], float(res))
        um = 0.5 * (tab.u[1:] + tab.u[:-1])
        vm = tab(um)
        dv = 1e-6 * np.maximum(1.0, np.abs(vm))
        out["orientation_ok"] &= bool(np.all(model.g(um, vm - dv) > 0)
                                      and np.all(model.g(um, vm + dv) < 0))
        out["stable_ok"] &= bool(np.all(model.dg_dv(tab.u[1:], tab.v[1:]) < 0))
    return out


# ---------------------------------------------------------------------------
# the weighted Lipschitz inequality at a fold
# ---------------------------------------------------------------------------

def fold_ratio(G: Callable, n: int, eps0: float, samples: int = 40,
               floor: float = 1e-8) -> float:
    """``min (G(w) - G(w_hat)) / ((w - w_hat) (G(w)**s + G(w_hat)**s))``, ``s = (n-1)/n``.

    Taken over ``0 < w_hat < w <= eps0`` on a geometric grid that starts
    where ``G`` first exceeds ``floor``: below that, ``G`` is a difference
    of nearly equal numbers and carries no information.
    """
    s = (n - 1) / n
    probe = eps0 * np.geomspace(1e-10, 1.0, 401)
    above = np.flatnonzero(np.asarray(G(probe), dtype=float) >= floor)
    if above.size == 0:
        raise ValueError("G never exceeds the noise floor on (0, eps0]")
    w = np.geomspace(probe[above[0]], eps0, samples)
    Gw = np.asarray(G(w), dtype=float)
    i, j = np.triu_indices(samples, k=1)  # w[i] < w[j]
    lhs = (Gw[j] - Gw[i]) / (w[j] - w[i])
    rhs = np.abs(Gw[j]) ** s + np.abs(Gw[i]) ** s
    return float(np.min(lhs / rhs))


@dataclass
class FoldInequalityReport:
    M_estimate: float
    holds: bool
    M_A: float
    M_B: float
    condition_H1: object
    condition_H2: object


def verify_lemma_A1(branches: BranchPair, model: NullclineModel,
                    eps0: Optional[float] = None, samples: int = 40) -> FoldInequalityReport:
    """Sample the fold inequality at both folds and the weighted Lipschitz
    condition of both branches with ``sigma = (n-1)/n``.

    Near ``A`` the branch ``H2`` is inverted by ``G(w) = G2(vA + dir_A w) - alpha``,
    near ``B`` by ``G(w) = beta - G1(vB + dir_B w)``; both are positive for
    small ``w > 0``.
    """
    folds = model.detected or detect_folds(model)
    eps0 = 0.1 * (folds.beta - folds.alpha) if eps0 is None else eps0
    (uA, vA), (uB, vB) = folds.A, folds.B

    def GA(w):
        return model.solve_u(vA + folds.dir_A * w, uA) - uA

    def GB(w):
        return uB - model.solve_u(vB + folds.dir_B * w, uB)

    floor = 1e-8 * max(1.0, abs(uA), abs(uB))
    MA = fold_ratio(GA, folds.n, eps0, samples, floor)
    MB = fold_ratio(GB, folds.n, eps0, samples, floor)
    sigma = (folds.n - 1) / folds.n
    c1 = verify_branch_condition(branches.H1, branches.beta, UPPER_CUTOFF_BETA, sigma,
                                 U=-branches.H1.lo)
    c2 = verify_branch_condition(branches.H2, branches.alpha, LOWER_CUTOFF_ALPHA, sigma,
                                 U=branches.H2.hi)
    M = min(MA, MB)
    return FoldInequalityReport(M, M > 0 and not c1.violated and not c2.violated, MA, MB, c1, c2)


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

@dataclass
class SlowFastState:
    t: float
    u: np.ndarray
    v: np.ndarray
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if np.shape(self.u) != np.shape(self.v):
            raise ValueError("u and v must have the same shape")


def _backward_euler_v(model, u, v, dt, eps):
    """Solve ``eps (w - v) / dt = g(u, w)`` per node; returns ``(w, failed mask)``."""
    w = v.copy()
    done = np.zeros(v.shape, dtype=bool)
    for _ in range(NEWTON_MAXIT):
        F = eps * (w - v) - dt * model.g(u, w)
        dF = eps - dt * model.dg_dv(u, w)
        dw = np.where(done, 0.0, F / dF)
        w = w - dw
        done |= np.abs(dw) <= NEWTON_TOL * np.maximum(1.0, np.abs(w))
        if np.all(done):
            break
    return w, ~(done & np.isfinite(w))


def update_v(model, u, v, dt, eps, t=math.nan):
    """Backward Euler for the fast variable with a substep fallback."""
    w, bad = _backward_euler_v(model, u, v, dt, eps)
    if np.any(bad):
        idx = np.flatnonzero(bad)
        ws = v[idx].copy()
        for _ in range(FALLBACK_SUBSTEPS):
            ws, still = _backward_euler_v(model, u[idx], ws, dt / FALLBACK_SUBSTEPS, eps)
            if np.any(still):
                node = int(idx[np.flatnonzero(still)[0]])
                raise NewtonDivergence("backward Euler for v did not converge", node=node, t=t)
        w[idx] = ws
    return w


def solve_slowfast(phi_u, phi_v, model: NullclineModel, f: Callable, epsilon: float,
                   params: SolverParams) -> Trajectory:
    """Integrate the slow-fast system: IMEX diffusion for ``u`` with ``f``
    explicit, then backward Euler for ``v`` at the new ``u``.

    ``meta['off_branch_nodes']`` counts initial nodes off the stable
    branches (``|g| > 1e-8`` or ``gv >= 0``).
    """
    clock = time.perf_counter()
    g = params.grid
    u = np.asarray(phi_u, dtype=float).copy()
    v = np.asarray(phi_v, dtype=float).copy()
    if u.shape != (g.size,) or v.shape != (g.size,):
        raise GridMismatch("initial data do not match the grid")
    state = SlowFastState(0.0, u, v, epsilon)
    traj = Trajectory([state], params)
    traj.meta["epsilon"] = float(epsilon)
    off = (np.abs(model.g(u, v)) > 1e-8) | (model.dg_dv(u, v) >= 0)
    traj.meta["off_branch_nodes"] = int(np.count_nonzero(off))
    n = params.n_steps
    for k in range(n):
        t_new = params.T_end if k == n - 1 else (k + 1) * params.dt
        dt = t_new - state.t
        u_new = diffuse(state.u, f(state.u, state.v), dt, params.theta, g)
        v_new = update_v(model, u_new, state.v, dt, epsilon, t_new)
        state = SlowFastState(t_new, u_new, v_new, epsilon)
        if (k + 1) % params.save_stride == 0 or k + 1 == n:
            traj.snapshots.append(state)
    traj.status = COMPLETED
    traj.wall_time = time.perf_counter() - clock
    return traj


def solve_hysteresis_limit(phi, xi0, branches: BranchPair, f: Callable,
                           params: SolverParams, monitors=()) -> Trajectory:
    """Hysteresis run with source ``f(u, H_j(u))``; snapshots carry ``v = H_j(u)``."""
    reduced = reduce_general_rhs(f, branches)
    traj = solve(phi, xi0, reduced, params, monitors)
    traj.snapshots = [FieldState(s.t, s.u, branches.evaluate(s.config, s.u), s.config,
                                 s.last_input) for s in traj.snapshots]
    traj.branches = branches
    return traj


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    sup_dev_u: float
    sup_dev_v: float
    switch_time_offsets: np.ndarray
    tube_r: float
    n_times: int

    @property
    def max_offset(self) -> float:
        finite = self.switch_time_offsets[~np.isnan(self.switch_time_offsets)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0


def first_crossings(times, v, level: float) -> np.ndarray:
    """Per node, the first time ``v`` crosses ``level`` (linear interpolation); NaN if never."""
    v = np.asarray(v, dtype=float) - level
    times = np.asarray(times, dtype=float)
    out = np.full(v.shape[1], np.nan)
    side = np.sign(v[0])
    for k in range(1, v.shape[0]):
        hit = np.isnan(out) & (np.sign(v[k]) != side) & (side != 0)
        if np.any(hit):
            a, b = v[k - 1, hit], v[k, hit]
            out[hit] = times[k - 1] + (times[k] - times[k - 1]) * a / (a - b)
    return out


def compare_to_hysteresis(slow: Trajectory, hyst: Trajectory, burn_in: float = 0.0,
                          tube_r: Optional[float] = None,
                          midline: Optional[float] = None) -> ComparisonReport:
    """Deviation of a slow-fast run from its hysteresis limit.

    ``v`` is not compared within ``tube_r`` (default ``4h``) of the free
    boundary ``b(t)`` of ``hyst`` when it carries a track.  Switch-time
    offsets are per node, ``t_slow - t_hyst``, for the first crossing of
    ``midline`` (default: midway between ``H1(beta)`` and ``H2(alpha)``);
    infinite where only one run switches, NaN where neither does.
    """
    if slow.grid != hyst.grid:
        raise GridMismatch("slow-fast and hysteresis runs use different grids")
    ts = {round(s.t, 12): s for s in slow.snapshots}
    th = {round(s.t, 12): s for s in hyst.snapshots}
    common = sorted(t for t in set(ts) & set(th) if t >= burn_in - 1e-12)
    if not common:
        raise WindowEmpty("no common save times after burn-in")
    g = slow.grid
    tube_r = 4 * g.h if tube_r is None else tube_r
    track = hyst.track
    du = dv = 0.0
    for t in common:
        a, b = ts[t], th[t]
        du = max(du, float(np.max(np.abs(a.u - b.u))))
        keep = np.ones(g.size, dtype=bool)
        if track is not None:
            keep = np.abs(g.nodes - track.b_at(b.t)) > tube_r
        if np.any(keep):
            dv = max(dv, float(np.max(np.abs(a.v - b.v)[keep])))
    if midline is None:
        br = hyst.branches
        midline = 0.5 * (float(br.H1(br.beta)) + float(br.H2(br.alpha)))
    tt = np.array(common)
    cs = first_crossings(tt, np.array([ts[t].v for t in common]), midline)
    ch = first_crossings(tt, np.array([th[t].v for t in common]), midline)
    off = cs - ch
    off[np.isnan(cs) != np.isnan(ch)] = math.inf
    return ComparisonReport(du, dv, off, tube_r, len(common))
