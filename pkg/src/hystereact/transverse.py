"""Transversality checks and tracking of the hysteresis free boundary.

For prototype data (configuration 1 left of ``abar``, 2 right of it, the
profile crossing ``alpha`` upward at ``abar``) the hysteresis topology is a
single point: ``a(t)``, the root of ``u = alpha`` near ``abar``, and its
running maximum ``b(t)``.  Relays at ``x <= b(t)`` are on ``H1``, the rest on
``H2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainViolation, MultipleRoots, NoRoot, WindowEmpty
from .field import FieldState, Grid
from .pde import TRANSVERSALITY_LOST
from .relay import OVERSHOOT_TOL, BranchPair

SLOPE_TOL = 1e-6
LEMMA_SLACK = 0.1

TRANSVERSE = "transverse"
LOST = "lost"


@dataclass
class FreeBoundaryTrack:
    abar: float
    alpha: float
    phibar: float
    delta: float
    times: list = field(default_factory=list)
    a_values: list = field(default_factory=list)
    b_values: list = field(default_factory=list)
    status: list = field(default_factory=list)
    reason: Optional[str] = None

    def record(self, t: float, a: float, status: str = TRANSVERSE) -> None:
        b = a if not self.b_values or math.isnan(self.b_values[-1]) else max(self.b_values[-1], a)
        self.times.append(float(t))
        self.a_values.append(float(a))
        self.b_values.append(float(b))
        self.status.append(status)

    @property
    def transverse(self) -> bool:
        return not self.status or self.status[-1] == TRANSVERSE

    def b_at(self, t: float) -> float:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if not math.isclose(self.times[i], t, rel_tol=1e-9, abs_tol=1e-12):
            raise KeyError(f"no track entry at t={t}")
        return self.b_values[i]

    def as_dict(self) -> dict:
        return {
            "abar": self.abar, "phibar": self.phibar, "delta": self.delta,
            "b_final": self.b_values[-1] if self.b_values else None,
            "a_final": self.a_values[-1] if self.a_values else None,
            "status": self.status[-1] if self.status else None,
            "reason": self.reason,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "a", "b", "status"])
            for row in zip(self.times, self.a_values, self.b_values, self.status):
                w.writerow([repr(row[0]), repr(row[1]), repr(row[2]), row[3]])


class Check(NamedTuple):
    ok: bool
    diagnostics: dict


def _slope(phi, grid: Grid) -> np.ndarray:
    return np.gradient(np.asarray(phi, dtype=float), grid.h)


def check_transverse(phi, xi, branches: BranchPair, grid: Grid,
                     slope_tol: float = SLOPE_TOL, r_nb: Optional[float] = None) -> Check:
    """Flat threshold contacts must sit inside a matching configuration patch.

    Wherever ``phi`` equals ``alpha`` (``beta``) to within ``h**2`` with a
    centered slope below ``slope_tol``, every node within ``r_nb`` (default
    ``2h``) must carry configuration 1 (2).
    """
    phi = np.asarray(phi, dtype=float)
    xi = np.asarray(xi)
    r_nb = 2 * grid.h if r_nb is None else r_nb
    x = grid.nodes
    flat = np.abs(_slope(phi, grid)) < slope_tol
    tol = grid.h ** 2
    offending = []
    for level, want in ((branches.alpha, 1), (branches.beta, 2)):
        for i in np.flatnonzero(flat & (np.abs(phi - level) <= tol)):
            near = np.abs(x - x[i]) <= r_nb + 1e-12
            if np.any(xi[near] != want):
                offending.append({"node": int(i), "x": float(x[i]), "level": level, "need": want})
    return Check(not offending, {"offending": offending})


def _roots(values, level) -> np.ndarray:
    """Cells ``i`` with a sign change of ``values - level`` between nodes i, i+1."""
    pos = np.asarray(values) - level > 0
    return np.flatnonzero(pos[:-1] != pos[1:])


def check_prototype(phi, xi0, abar: float, grid: Grid, branches: BranchPair) -> Check:
    """Step configuration at ``abar``, no ``beta`` root left of it, a unique
    ``alpha`` root at it, positive slope there.  ``diagnostics['phibar']``
    carries half the slope at ``abar``."""
    phi = np.asarray(phi, dtype=float)
    xi0 = np.asarray(xi0)
    k = grid.nearest(abar)
    if not math.isclose(grid.nodes[k], abar, abs_tol=1e-12):
        raise ValueError("abar must be a grid node")
    failed = []
    if not (np.all(xi0[: k + 1] == 1) and np.all(xi0[k + 1:] == 2)):
        failed.append(1)
    left = phi[: k + 1]
    if np.any(left >= branches.beta) or _roots(left, branches.beta).size:
        failed.append(2)
    right = phi[k:]
    scale = max(1.0, abs(branches.alpha))
    on_root = abs(right[0] - branches.alpha) <= 1e-12 * scale
    if not on_root or np.any(right[1:] <= branches.alpha):
        failed.append(3)
    slope = float(_slope(phi, grid)[k])
    if not slope > 0:
        failed.append(4)
    return Check(not failed, {"failed_items": failed, "phibar": slope / 2, "slope": slope})


def compute_delta(phi, abar: float, grid: Grid, phibar: float) -> float:
    """Largest grid-aligned radius on which ``phi' >= phibar`` around ``abar``."""
    k = grid.nearest(abar)
    slope = _slope(phi, grid)
    cap = min(abar, 1.0 - abar) / 2
    m_max = int(math.floor(cap / grid.h + 1e-9))
    m = 0
    while m < m_max and slope[k - m - 1] >= phibar and slope[k + m + 1] >= phibar:
        m += 1
    return m * grid.h


def locate_a(state: FieldState, track: FreeBoundaryTrack, grid: Grid) -> float:
    """Root of ``u = alpha`` on ``[abar - delta, 1]``; appends it to ``track``.

    Raises :class:`MultipleRoots` or :class:`NoRoot` when the root is not
    unique; the track is then marked lost.
    """
    lo = grid.nearest(max(0.0, track.abar - track.delta))
    seg = np.asarray(state.u[lo:], dtype=float)
    cells = _roots(seg, track.alpha)
    if cells.size != 1:
        track.record(state.t, math.nan, LOST)
        track.reason = "no root of u=alpha" if cells.size == 0 else f"{cells.size} roots of u=alpha"
        raise (NoRoot if cells.size == 0 else MultipleRoots)(track.reason)
    i = int(cells[0])
    u0, u1 = seg[i], seg[i + 1]
    s = (track.alpha - u0) / (u1 - u0)
    a = (lo + i + s) * grid.h
    track.record(state.t, a)
    return a


class FreeBoundaryMonitor:
    """Solver monitor that records ``a(t)``, ``b(t)`` and watches transversality.

    Stops the run (status ``transversality_lost``) when the root of
    ``u = alpha`` stops being unique, the slope near ``abar`` drops below
    ``phibar``, ``b`` leaves ``[.., abar + delta]``, or ``u`` reaches ``beta``
    on ``[0, b]``.
    """

    def __init__(self, abar: float, phibar: Optional[float] = None, delta: Optional[float] = None):
        self.abar = abar
        self.phibar = phibar
        self.delta = delta
        self.track: Optional[FreeBoundaryTrack] = None

    def start(self, state, params, branches):
        self.grid = params.grid
        self.beta = branches.beta
        phibar = self.phibar
        if phibar is None:
            phibar = float(_slope(state.u, self.grid)[self.grid.nearest(self.abar)]) / 2
        delta = self.delta if self.delta is not None else compute_delta(
            state.u, self.abar, self.grid, phibar)
        self.track = FreeBoundaryTrack(self.abar, branches.alpha, phibar, delta)
        if not phibar > 0 or delta <= 0:
            self.track.reason = "initial data not transverse at abar"
            self.track.record(state.t, math.nan, LOST)
            return TRANSVERSALITY_LOST
        return self(state)

    def _lose(self, reason):
        self.track.status[-1] = LOST
        self.track.reason = reason
        return TRANSVERSALITY_LOST

    def __call__(self, state):
        tr = self.track
        try:
            a = locate_a(state, tr, self.grid)
        except (NoRoot, MultipleRoots):
            return TRANSVERSALITY_LOST
        b = tr.b_values[-1]
        if b > tr.abar + tr.delta + 1e-12:
            return self._lose(f"b={b} left the neighbourhood abar+delta")
        x = self.grid.nodes
        window = np.abs(x - tr.abar) <= tr.delta + 1e-12
        if np.any(_slope(state.u, self.grid)[window] < tr.phibar):
            return self._lose("slope fell below phibar near abar")
        if np.any(state.u[x <= b] >= self.beta):
            return self._lose("u reached beta on [0, b]")
        return None


def hysteresis_from_free_boundary(state: FieldState, b: float, branches: BranchPair) -> np.ndarray:
    """``H1(u)`` on ``x <= b`` and ``H2(u)`` on ``x > b``."""
    u = np.asarray(state.u, dtype=float)
    x = np.arange(u.size) / (u.size - 1)
    left = x <= b
    bad = np.flatnonzero((left & (u > branches.beta + OVERSHOOT_TOL))
                         | (~left & (u < branches.alpha - OVERSHOOT_TOL)))
    if bad.size:
        i = int(bad[0])
        raise DomainViolation("free-boundary representation left a branch domain", node=i,
                              value=float(u[i]))
    out = np.empty_like(u)
    if np.any(left):
        out[left] = branches.H1(np.minimum(u[left], branches.beta))
    if np.any(~left):
        out[~left] = branches.H2(np.maximum(u[~left], branches.alpha))
    return out


@dataclass
class LemmaReport:
    lhs: float
    rhs: float
    holds: bool
    slack: float
    n_times: int

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else (0.0 if self.lhs == 0 else math.inf)

    def as_text(self) -> str:
        return "\n".join(f"{k} = {v}" for k, v in (
            ("lhs", repr(self.lhs)), ("rhs", repr(self.rhs)), ("ratio", repr(self.ratio)),
            ("slack", repr(self.slack)), ("holds", self.holds), ("n_times", self.n_times))) + "\n"


def _transverse_times(traj):
    tr = traj.track
    if tr is None:
        raise ValueError("trajectory has no free-boundary track")
    ok = {round(t, 12) for t, s in zip(tr.times, tr.status) if s == TRANSVERSE}
    return {round(s.t, 12): s for s in traj.snapshots if round(s.t, 12) in ok}


def check_lemma_b_estimate(traj1, traj2, slack: float = LEMMA_SLACK,
                           phibar: Optional[float] = None) -> LemmaReport:
    """Compare ``max |b - b_hat|`` with ``max |u - u_hat| / phibar``.

    Taken over the save times at which both runs are still transverse;
    ``phibar`` defaults to the one measured on ``traj1``.
    """
    if traj1.grid != traj2.grid:
        raise ValueError("trajectories live on different grids")
    s1, s2 = _transverse_times(traj1), _transverse_times(traj2)
    common = sorted(set(s1) & set(s2))
    if not common:
        raise WindowEmpty("no common transverse save times")
    phibar = traj1.track.phibar if phibar is None else phibar
    lhs = max(abs(traj1.track.b_at(t) - traj2.track.b_at(t)) for t in common)
    du = max(float(np.max(np.abs(s1[t].u - s2[t].u))) for t in common)
    rhs = du / phibar
    return LemmaReport(lhs, rhs, lhs <= rhs * (1 + slack), slack, len(common))
