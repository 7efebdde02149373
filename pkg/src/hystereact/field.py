"""Spatially distributed hysteresis: one relay per grid node on [0, 1]."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DomainViolation, InconsistentInitialData
from .relay import BranchPair, RelayState, initial_configs, update_configs


@dataclass(frozen=True)
class Grid:
    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells}")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) / self.n_cells

    @property
    def size(self) -> int:
        return self.n_cells + 1

    def nearest(self, x: float) -> int:
        """Index of the node closest to ``x`` (ties go left)."""
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"{x} is outside [0, 1]")
        return int(np.ceil(x * self.n_cells - 0.5))


def step_config(grid: Grid, abar: float) -> np.ndarray:
    """Configuration 1 on ``x <= abar`` and 2 beyond, with ``abar`` snapped to a node."""
    i = grid.nearest(abar)
    xi = np.full(grid.size, 2, dtype=np.int8)
    xi[: i + 1] = 1
    return xi


@dataclass
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray
    config: np.ndarray
    last_input: np.ndarray

    @property
    def relays(self) -> list:
        return [RelayState(int(c), float(g)) for c, g in zip(self.config, self.last_input)]

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.u.copy(), self.v.copy(), self.config.copy(),
                          self.last_input.copy())


class Consistency(NamedTuple):
    ok: bool
    node: Optional[int]


def check_consistent(phi, xi0, branches: BranchPair, literal: bool = False) -> Consistency:
    """Check that an initial profile and configuration can coexist.

    By default a node with ``phi >= beta`` must carry configuration 2 and a
    node with ``phi <= alpha`` configuration 1, i.e. the states the relay
    itself assigns at time zero.  ``literal=True`` applies the opposite
    assignment (``phi >= beta`` forces 1, ``phi <= alpha`` forces 2).
    """
    phi = np.asarray(phi, dtype=float)
    xi0 = np.asarray(xi0)
    if phi.shape != xi0.shape:
        raise ValueError("phi and xi0 must have the same length")
    at_beta, at_alpha = (1, 2) if literal else (2, 1)
    bad = ((phi >= branches.beta) & (xi0 != at_beta)) | ((phi <= branches.alpha) & (xi0 != at_alpha))
    bad |= (xi0 != 1) & (xi0 != 2)
    idx = np.flatnonzero(bad)
    return Consistency(True, None) if idx.size == 0 else Consistency(False, int(idx[0]))


def init_field(phi, xi0, branches: BranchPair) -> FieldState:
    phi = np.asarray(phi, dtype=float).copy()
    res = check_consistent(phi, xi0, branches)
    if not res.ok:
        raise InconsistentInitialData(res.node)
    config = initial_configs(xi0, phi, branches)
    v = branches.evaluate(config, phi)
    return FieldState(0.0, phi, v, config, phi.copy())


def advance_field(state: FieldState, u_new, t_new: float, branches: BranchPair) -> FieldState:
    if not t_new > state.t:
        raise ValueError(f"t_new={t_new} must exceed current t={state.t}")
    u_new = np.asarray(u_new, dtype=float).copy()
    config = update_configs(state.config, state.last_input, u_new, branches)
    v = branches.evaluate(config, u_new)
    return FieldState(float(t_new), u_new, v, config, u_new.copy())


def drive_relays(grid: Grid, times: Sequence[float], u_series, xi0, branches: BranchPair) -> list:
    """Run the relays on a prescribed input history; returns one state per time."""
    states = [replace(init_field(u_series[0], xi0, branches), t=float(times[0]))]
    for t, u in zip(times[1:], u_series[1:]):
        states.append(advance_field(states[-1], u, t, branches))
    return states


def write_snapshot_csv(path, grid: Grid, state: FieldState) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u", "v", "config"])
        for x, u, v, c in zip(grid.nodes, state.u, state.v, state.config):
            w.writerow([repr(float(x)), repr(float(u)), repr(float(v)), int(c)])


def read_snapshot_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = {k: np.array([float(r[k]) for r in rows]) for k in ("x", "u", "v")}
    cols["config"] = np.array([int(r["config"]) for r in rows], dtype=np.int8)
    return cols


__all__ = [
    "Grid", "FieldState", "Consistency", "check_consistent", "init_field", "advance_field",
    "drive_relays", "step_config", "write_snapshot_csv", "read_snapshot_csv", "DomainViolation",
]
