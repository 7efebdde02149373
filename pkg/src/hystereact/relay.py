"""Two-branch relay hysteresis operator.

The relay keeps one bit of memory, the configuration ``1`` or ``2``.  It
switches to ``1`` whenever the input reaches ``alpha`` and to ``2`` whenever
it reaches ``beta``; between events the configuration is frozen and the
output is ``H1(g)`` or ``H2(g)`` accordingly.

Discrete inputs are treated as piecewise linear in time.  Within one step
the latest threshold event decides the new configuration, and an input that
merely touches a threshold (within ``ETA_SWITCH``) counts as reaching it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, EvaluationOutsideDomain

ETA_SWITCH = 1e-12
OVERSHOOT_TOL = 1e-9
DIVERGENCE_FACTOR = 1.5

UPPER_CUTOFF_BETA = "upper_cutoff_beta"
LOWER_CUTOFF_ALPHA = "lower_cutoff_alpha"


# ---------------------------------------------------------------------------
# branch functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    """A scalar function with a closed definition interval ``[lo, hi]``.

    Arguments within ``OVERSHOOT_TOL`` of the interval are clipped onto it;
    anything further out raises :class:`EvaluationOutsideDomain`.  Accepts
    scalars or arrays.
    """

    func: Callable[[np.ndarray], np.ndarray]
    lo: float = -math.inf
    hi: float = math.inf
    name: str = "branch"

    def __call__(self, u):
        arr = np.asarray(u, dtype=float)
        bad = (arr < self.lo - OVERSHOOT_TOL) | (arr > self.hi + OVERSHOOT_TOL)
        if np.any(bad):
            idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
            val = float(np.atleast_1d(arr)[idx])
            raise EvaluationOutsideDomain(
                f"{self.name} evaluated at {val!r} outside [{self.lo}, {self.hi}]",
                node=idx if arr.ndim else None,
                value=val,
            )
        out = np.asarray(self.func(np.clip(arr, self.lo, self.hi)), dtype=float)
        if arr.ndim == 0:
            return float(out)
        return np.broadcast_to(out, arr.shape).copy()


def affine_branch(slope: float, intercept: float, lo: float = -math.inf,
                  hi: float = math.inf, name: str = "affine") -> Branch:
    return Branch(lambda u: slope * u + intercept, lo, hi, name)


def constant_branch(value: float, lo: float = -math.inf, hi: float = math.inf,
                    name: str = "constant") -> Branch:
    return Branch(lambda u: np.full_like(u, value, dtype=float), lo, hi, name)


def formula_branch(func: Callable, lo: float = -math.inf, hi: float = math.inf,
                   name: str = "formula") -> Branch:
    return Branch(func, lo, hi, name)


# Roots of v**3 - v = u, i.e. the zero set of g(u, v) = u + v - v**3.
CUBIC_FOLD_U = 2.0 / (3.0 * math.sqrt(3.0))
_CUBIC_R = 2.0 / math.sqrt(3.0)


def _polish_cubic(v, u):
    d = 3.0 * v * v - 1.0
    safe = np.abs(d) > 1e-3
    step = np.where(safe, (v ** 3 - v - u) / np.where(safe, d, 1.0), 0.0)
    return v - step


def _cubic_upper(u):
    u = np.asarray(u, dtype=float)
    inner = np.abs(u) <= CUBIC_FOLD_U
    ratio = np.clip(u / CUBIC_FOLD_U, -1.0, 1.0)
    trig = _CUBIC_R * np.cos(np.arccos(ratio) / 3.0)
    big = np.maximum(u / CUBIC_FOLD_U, 1.0)
    hyp = _CUBIC_R * np.cosh(np.arccosh(big) / 3.0)
    return _polish_cubic(np.where(inner, trig, hyp), u)


def _cubic_lower(u):
    u = np.asarray(u, dtype=float)
    return -_cubic_upper(-u)


def cubic_upper_branch() -> Branch:
    """Upper outer root of ``v**3 - v = u``, defined for ``u >= -2/(3*sqrt(3))``."""
    return Branch(_cubic_upper, -CUBIC_FOLD_U, math.inf, "cubic_upper")


def cubic_lower_branch() -> Branch:
    """Lower outer root of ``v**3 - v = u``, defined for ``u <= 2/(3*sqrt(3))``."""
    return Branch(_cubic_lower, -math.inf, CUBIC_FOLD_U, "cubic_lower")


def tabulated_branch(u, v, name: str = "tabulated") -> Branch:
    """Branch from strictly increasing samples ``u`` with values ``v`` (PCHIP)."""
    from scipy.interpolate import PchipInterpolator

    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.ndim != 1 or u.shape != v.shape or u.size < 2:
        raise ValueError("tabulated branch needs two equal 1-D arrays of length >= 2")
    if np.any(np.diff(u) <= 0):
        raise ValueError("tabulated branch abscissae must be strictly increasing")
    return Branch(PchipInterpolator(u, v, extrapolate=False), float(u[0]), float(u[-1]), name)


# ---------------------------------------------------------------------------
# relay state and the scalar automaton
# ---------------------------------------------------------------------------

@dataclass
class BranchPair:
    """Thresholds ``alpha < beta`` with branches ``H1`` on ``(-inf, beta]``
    and ``H2`` on ``[alpha, inf)``.

    ``sigma`` is the exponent of the weighted Lipschitz condition the
    branches are claimed to satisfy; ``M_hint`` optionally records a known
    constant for it.
    """

    alpha: float
    beta: float
    H1: Callable
    H2: Callable
    sigma: float = 0.0
    M_hint: Optional[float] = None

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError(f"need alpha < beta, got {self.alpha} >= {self.beta}")
        if not 0.0 <= self.sigma < 1.0:
            raise ValueError(f"sigma must lie in [0, 1), got {self.sigma}")
        if self.M_hint is not None and self.M_hint <= 0:
            raise ValueError("M_hint must be positive")

    def evaluate(self, config, u):
        """Vectorized relay output for per-node configurations."""
        config = np.asarray(config)
        u = np.asarray(u, dtype=float)
        hi = (config == 1) & (u > self.beta + OVERSHOOT_TOL)
        lo = (config == 2) & (u < self.alpha - OVERSHOOT_TOL)
        bad = np.flatnonzero(hi | lo)
        if bad.size:
            i = int(bad[0])
            raise DomainViolation(
                f"input {u[i]!r} outside the domain of branch H{config[i]}", node=i, value=float(u[i]))
        out = np.empty_like(u)
        m1 = config == 1
        if np.any(m1):
            out[m1] = self.H1(np.minimum(u[m1], self.beta))
        if np.any(~m1):
            out[~m1] = self.H2(np.maximum(u[~m1], self.alpha))
        return out


def cubic_branch_pair() -> BranchPair:
    """Outer stable branches of the nullcline of ``g(u, v) = u + v - v**3``."""
    return BranchPair(-CUBIC_FOLD_U, CUBIC_FOLD_U, cubic_lower_branch(),
                      cubic_upper_branch(), sigma=0.5)


@dataclass(frozen=True)
class RelayState:
    config: int
    last_input: float

    def __post_init__(self):
        if self.config not in (1, 2):
            raise ValueError(f"config must be 1 or 2, got {self.config}")


def initial_config(zeta0: int, g0: float, branches: BranchPair) -> int:
    if g0 <= branches.alpha:
        return 1
    if g0 >= branches.beta:
        return 2
    return zeta0


def _hit_time(g0: float, g1: float, level: float) -> Optional[float]:
    """Latest fraction ``s`` in ``(0, 1]`` at which the segment reaches ``level``."""
    if abs(g1 - level) <= ETA_SWITCH:
        return 1.0
    if (g0 - level) * (g1 - level) < 0.0:
        return (level - g0) / (g1 - g0)
    return None


def update_config(state: RelayState, g_new: float, branches: BranchPair) -> RelayState:
    s_a = _hit_time(state.last_input, g_new, branches.alpha)
    s_b = _hit_time(state.last_input, g_new, branches.beta)
    config = state.config
    if s_a is not None and (s_b is None or s_a >= s_b):
        config = 1
    elif s_b is not None:
        config = 2
    return RelayState(config, float(g_new))


def output(state: RelayState, g: float, branches: BranchPair) -> float:
    if state.config == 1:
        if g > branches.beta + OVERSHOOT_TOL:
            raise DomainViolation(f"input {g!r} above beta on branch H1", value=g)
        return float(branches.H1(min(g, branches.beta)))
    if g < branches.alpha - OVERSHOOT_TOL:
        raise DomainViolation(f"input {g!r} below alpha on branch H2", value=g)
    return float(branches.H2(max(g, branches.alpha)))


# ---------------------------------------------------------------------------
# vectorized automaton, used by the field module
# ---------------------------------------------------------------------------

def initial_configs(xi0, g0, branches: BranchPair) -> np.ndarray:
    g0 = np.asarray(g0, dtype=float)
    out = np.asarray(xi0, dtype=np.int8).copy()
    out[g0 >= branches.beta] = 2
    out[g0 <= branches.alpha] = 1
    return out


def hit_fractions(g0, g1, level: float) -> np.ndarray:
    """Array version of the latest-hit fraction; NaN where the level is not reached."""
    g0 = np.asarray(g0, dtype=float)
    g1 = np.asarray(g1, dtype=float)
    touch = np.abs(g1 - level) <= ETA_SWITCH
    cross = (g0 - level) * (g1 - level) < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (level - g0) / (g1 - g0)
    return np.where(touch, 1.0, np.where(cross, s, np.nan))


def update_configs(config, last, g_new, branches: BranchPair) -> np.ndarray:
    s_a = hit_fractions(last, g_new, branches.alpha)
    s_b = hit_fractions(last, g_new, branches.beta)
    has_a = ~np.isnan(s_a)
    has_b = ~np.isnan(s_b)
    to_one = has_a & (~has_b | (s_a >= np.where(has_b, s_b, 0.0)))
    to_two = has_b & ~to_one
    new = np.asarray(config, dtype=np.int8).copy()
    new[to_one] = 1
    new[to_two] = 2
    return new


def switch_fractions(config, last, g_new, branches: BranchPair) -> np.ndarray:
    """Fraction of the step at which each relay would change configuration.

    NaN for relays that keep their configuration.
    """
    config = np.asarray(config)
    new = update_configs(config, last, g_new, branches)
    s_a = hit_fractions(last, g_new, branches.alpha)
    s_b = hit_fractions(last, g_new, branches.beta)
    frac = np.where(new == 1, s_a, s_b)
    return np.where(new != config, frac, np.nan)


# ---------------------------------------------------------------------------
# weighted Lipschitz condition
# ---------------------------------------------------------------------------

@dataclass
class BranchConditionReport:
    M_estimate: float
    max_ratio_location: tuple
    violated: bool
    history: list = field(default_factory=list)
    levels: list = field(default_factory=list)


def _sample_distances(span: float, samples: int) -> np.ndarray:
    # geometric cluster toward the threshold plus a uniform cover of the range
    near = np.geomspace(span, span / samples ** 2, samples)
    uniform = span * np.arange(1, samples + 1) / samples
    return np.unique(np.concatenate([near, uniform]))


def _sup_ratio(branch, threshold, side, sigma, span, samples):
    d = _sample_distances(span, samples)
    if side == UPPER_CUTOFF_BETA:
        u = threshold - d
        dist = threshold - u
    else:
        u = threshold + d
        dist = u - threshold
    h = np.asarray(branch(u), dtype=float)
    w = dist ** sigma
    i, j = np.triu_indices(u.size, k=1)
    du = np.abs(u[i] - u[j])
    keep = du > 0
    i, j, du = i[keep], j[keep], du[keep]
    ratio = np.abs(h[i] - h[j]) * (w[i] + w[j]) / du
    k = int(np.argmax(ratio))
    return float(ratio[k]), (float(u[i[k]]), float(u[j[k]]))


def verify_branch_condition(branch, threshold: float, side: str, sigma: float,
                            U: float, samples: int = 64,
                            refinements: int = 3) -> BranchConditionReport:
    """Estimate the constant ``M`` of the weighted Lipschitz bound of a branch.

    Samples pairs ``(u, u_hat)`` on a grid clustered toward ``threshold`` and
    takes the supremum of::

        |H(u) - H(u_hat)| * (dist(u)**sigma + dist(u_hat)**sigma) / |u - u_hat|

    where ``dist`` is ``beta - u`` (``side='upper_cutoff_beta'``, sampling
    ``[-U, beta)``) or ``u - alpha`` (``side='lower_cutoff_alpha'``, sampling
    ``(alpha, U]``).  The sample count is doubled ``refinements`` times; the
    condition is reported violated when every doubling inflates the supremum
    by more than ``DIVERGENCE_FACTOR``.
    """
    if not 0.0 <= sigma < 1.0:
        raise ValueError("sigma must lie in [0, 1)")
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if side == UPPER_CUTOFF_BETA:
        span = threshold + U
    elif side == LOWER_CUTOFF_ALPHA:
        span = U - threshold
    else:
        raise ValueError(f"unknown side {side!r}")
    if span <= 0:
        raise ValueError("U does not leave a nonempty sampling range")

    history, levels, where = [], [], None
    for r in range(refinements + 1):
        s = samples * 2 ** r
        m, where = _sup_ratio(branch, threshold, side, sigma, span, s)
        history.append(m)
        levels.append(s)
    growth = [b / a if a > 0 else (math.inf if b > 0 else 1.0)
              for a, b in zip(history, history[1:])]
    violated = len(growth) >= 3 and all(g > DIVERGENCE_FACTOR for g in growth[-3:])
    return BranchConditionReport(history[-1], where, violated, history, levels)
