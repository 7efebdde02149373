"""Experiment driver: ``hystereact <kind> --config <path> [--out <dir>] [--jobs <k>]``.

A config is a JSON object with ``problem``, ``solver`` and ``output``
blocks plus an optional ``seed`` and a block named after the experiment
(``sweep``, ``verify``, ``kernel``, ``compare``).  Every run writes its
CSV/JSON artifacts and a ``manifest.txt`` listing their SHA-256 hashes.

Exit codes: 0 completed, 1 config or input error, 2 transversality lost,
3 domain violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from types import SimpleNamespace
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigError, DomainViolation, HysteresisError, WindowEmpty
from .field import Grid, step_config
from .pde import (
    COMPLETED, DOMAIN_VIOLATION, TRANSVERSALITY_LOST, SolverParams, heat_kernel_bound_check,
    run_summary, solve, write_trajectory_csv,
)
from .relay import (
    LOWER_CUTOFF_ALPHA, UPPER_CUTOFF_BETA, BranchPair, affine_branch, constant_branch,
    cubic_branch_pair, verify_branch_condition,
)
from .slowfast import (
    NullclineModel, compare_to_hysteresis, cubic_model, detect_folds, extract_branches,
    solve_hysteresis_limit, solve_slowfast, verify_lemma_A1,
)
from .transverse import FreeBoundaryMonitor, check_lemma_b_estimate

KINDS = ("simulate", "slowfast", "verify-branch", "sweep", "compare", "kernel-check")
EXIT = {COMPLETED: 0, TRANSVERSALITY_LOST: 2, DOMAIN_VIOLATION: 3}
SWEEP_COLUMNS = ["axis", "value", "status", "b_end", "sup_dev_u", "sup_dev_v",
                 "lhs", "rhs", "holds", "max_offset"]
KERNEL_BOUND = 0.30


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    n_cells: int = 400
    dt: float = 1e-4
    T_end: float = 0.05
    theta: float = 0.5
    overshoot_policy: str = "halt"


@dataclass
class OutputConfig:
    directory: str = "out"
    save_stride: int = 1


@dataclass
class ProblemConfig:
    branches: dict = field(default_factory=lambda: {"type": "cubic"})
    phi: dict = field(default_factory=lambda: {"type": "affine", "slope": 0.6,
                                               "intercept": "alpha", "x0": 0.4})
    perturbation: Optional[dict] = None
    xi0: dict = field(default_factory=lambda: {"type": "step"})
    abar: Optional[float] = 0.4
    track: bool = True
    source: str = "v"
    epsilon: float = 1e-3


@dataclass
class ExperimentConfig:
    kind: str
    problem: ProblemConfig
    solver: SolverConfig
    output: OutputConfig
    seed: int = 0
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    kernel: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    text: str = ""

    def params(self) -> SolverParams:
        s = self.solver
        return SolverParams(Grid(s.n_cells), s.dt, s.T_end, s.theta, s.overshoot_policy,
                            self.output.save_stride)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("text")
        return d


def _line_of(text: str, key: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return i
    return None


def _block(cls, raw, name, text):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{name} must be an object", field=name, line=_line_of(text, name))
    known = set(cls.__dataclass_fields__)
    for k in raw:
        if k not in known:
            raise ConfigError(f"unknown field {name}.{k}", field=f"{name}.{k}", line=_line_of(text, k))
    return cls(**raw)


def _check_positive(value, name, text, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok or not math.isfinite(value):
        raise ConfigError(f"{name} must be a positive {'integer' if integer else 'number'}, got {value!r}",
                          field=name, line=_line_of(text, name.split(".")[-1]))


def parse_config(text: str, kind: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate a JSON config; ``kind`` overrides the file's."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", line=1)
    file_kind = raw.get("kind")
    if kind and file_kind and kind != file_kind:
        raise ConfigError(f"config is for {file_kind!r}, not {kind!r}", field="kind",
                          line=_line_of(text, "kind"))
    kind = kind or file_kind
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}", field="kind", line=_line_of(text, "kind"))
    unknown = set(raw) - {"kind", "problem", "solver", "output", "seed", "sweep", "verify",
                          "kernel", "compare"}
    if unknown:
        k = sorted(unknown)[0]
        raise ConfigError(f"unknown block {k!r}", field=k, line=_line_of(text, k))
    cfg = ExperimentConfig(
        kind,
        _block(ProblemConfig, raw.get("problem"), "problem", text),
        _block(SolverConfig, raw.get("solver"), "solver", text),
        _block(OutputConfig, raw.get("output"), "output", text),
        int(raw.get("seed", 0)),
        raw.get("sweep") or {}, raw.get("verify") or {}, raw.get("kernel") or {},
        raw.get("compare") or {}, text,
    )
    _check_positive(cfg.solver.n_cells, "solver.n_cells", text, integer=True)
    _check_positive(cfg.solver.dt, "solver.dt", text)
    _check_positive(cfg.solver.T_end, "solver.T_end", text)
    _check_positive(cfg.output.save_stride, "output.save_stride", text, integer=True)
    _check_positive(cfg.problem.epsilon, "problem.epsilon", text)
    if cfg.problem.abar is not None and not 0.0 <= cfg.problem.abar <= 1.0:
        raise ConfigError("problem.abar must lie in [0, 1]", field="problem.abar",
                          line=_line_of(text, "abar"))
    try:
        cfg.params()
    except ValueError as exc:
        raise ConfigError(str(exc), field="solver", line=_line_of(text, "solver")) from None
    if kind == "sweep":
        axis = cfg.sweep.get("axis")
        if axis not in ("perturbation", "epsilon", "grid"):
            raise ConfigError("sweep.axis must be perturbation, epsilon or grid", field="sweep.axis",
                              line=_line_of(text, "axis"))
        if not cfg.sweep.get("values"):
            raise ConfigError("sweep.values must be a nonempty list", field="sweep.values",
                              line=_line_of(text, "values"))
    return cfg


# ---------------------------------------------------------------------------
# building problems
# ---------------------------------------------------------------------------

def nullcline_from_spec(spec: dict) -> NullclineModel:
    name = spec.get("model", "cubic")
    if name == "cubic":
        return cubic_model()
    if name == "fold_polynomial":
        n = int(spec.get("n", 2))
        p = np.polynomial.Polynomial(np.polynomial.polynomial.polypow([-1.0, 0.0, 1.0], n - 1)).integ()
        return NullclineModel(lambda u, v: u - p(v),
                              gu=lambda u, v: np.ones_like(np.asarray(v, dtype=float)),
                              gv=lambda u, v: -(np.asarray(v, dtype=float) ** 2 - 1) ** (n - 1),
                              dv_k=lambda k, u, v: -p.deriv(k)(v))
    raise ConfigError(f"unknown nullcline model {name!r}", field="problem.branches.model")


def _branch_from_spec(spec, lo=-math.inf, hi=math.inf):
    # optional "lo"/"hi" shrink the domain further
    lo, hi = max(lo, float(spec.get("lo", lo))), min(hi, float(spec.get("hi", hi)))
    if "value" in spec:
        return constant_branch(float(spec["value"]), lo, hi)
    return affine_branch(float(spec.get("slope", 0.0)), float(spec.get("intercept", 0.0)), lo, hi)


def branches_from_spec(spec: dict) -> BranchPair:
    kind = spec.get("type", "cubic")
    if kind == "cubic":
        return cubic_branch_pair()
    if kind == "nullcline":
        model = nullcline_from_spec(spec)
        detect_folds(model, tuple(spec.get("v_range", (-3.0, 3.0))))
        return extract_branches(model, tuple(spec.get("u_range", (-1.0, 1.0))),
                                int(spec.get("resolution", 200)))
    if kind in ("affine", "constant"):
        try:
            a, b = float(spec["alpha"]), float(spec["beta"])
            return BranchPair(a, b, _branch_from_spec(spec["H1"], hi=b), _branch_from_spec(spec["H2"], lo=a),
                              sigma=float(spec.get("sigma", 0.0)))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad branch spec: {exc}", field="problem.branches") from None
    raise ConfigError(f"unknown branch type {kind!r}", field="problem.branches.type")


def _level(value, branches: BranchPair) -> float:
    if value == "alpha":
        return branches.alpha
    if value == "beta":
        return branches.beta
    return float(value)


def phi_from_spec(problem: ProblemConfig, grid: Grid, branches: BranchPair, seed: int = 0,
                  amplitude: Optional[float] = None) -> np.ndarray:
    """Initial profile; ``amplitude`` overrides the perturbation amplitude."""
    spec, x = problem.phi, grid.nodes
    kind = spec.get("type", "affine")
    if kind == "affine":
        base = _level(spec.get("intercept", 0.0), branches) + float(spec.get("shift", 0.0))
        phi = base + float(spec.get("slope", 0.0)) * (x - float(spec.get("x0", 0.0)))
    elif kind == "cosine":
        phi = _level(spec.get("mean", 0.0), branches) + float(spec.get("amplitude", 0.0)) * np.cos(np.pi * x)
    elif kind == "table":
        pts = np.asarray(spec.get("pairs"), dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or np.any(pts[:, 0] < 0) or np.any(pts[:, 0] > 1):
            raise ConfigError("phi.pairs must be [x, value] pairs with x in [0, 1]",
                              field="problem.phi.pairs")
        phi = np.interp(x, pts[:, 0], pts[:, 1])
    else:
        raise ConfigError(f"unknown phi type {kind!r}", field="problem.phi.type")
    pert = problem.perturbation or {}
    amp = float(pert.get("amplitude", 0.0)) if amplitude is None else amplitude
    if amp:
        if pert.get("shape", "cos") == "random":
            # smooth random Neumann modes, normalized to sup-norm amp
            rng = np.random.default_rng(seed)
            modes = int(pert.get("modes", 4))
            c = rng.normal(size=modes)
            shape = sum(ck * np.cos((k + 1) * np.pi * x) for k, ck in enumerate(c))
            phi = phi + amp * shape / np.max(np.abs(shape))
        else:
            phi = phi + amp * np.cos(np.pi * x)
    return phi


def xi0_from_spec(problem: ProblemConfig, grid: Grid) -> np.ndarray:
    spec = problem.xi0
    kind = spec.get("type", "step")
    if kind == "step":
        abar = spec.get("abar", problem.abar)
        if abar is None:
            raise ConfigError("step xi0 needs abar", field="problem.xi0.abar")
        return step_config(grid, float(abar))
    if kind == "constant":
        return np.full(grid.size, int(spec.get("value", 1)), dtype=np.int8)
    if kind == "table":
        vals = np.asarray(spec.get("values"), dtype=np.int8)
        if vals.shape != (grid.size,) or not np.all(np.isin(vals, (1, 2))):
            raise ConfigError("xi0.values must list 1/2 for every node", field="problem.xi0.values")
        return vals
    raise ConfigError(f"unknown xi0 type {kind!r}", field="problem.xi0.type")


def source_from_name(name: str):
    return {
        "v": lambda u, v: v,
        "zero": lambda u, v: np.zeros_like(u),
        "one": lambda u, v: np.ones_like(u),
    }[name]


# ---------------------------------------------------------------------------
# single runs
# ---------------------------------------------------------------------------

def _monitors(cfg: ExperimentConfig):
    p = cfg.problem
    return [FreeBoundaryMonitor(p.abar)] if p.track and p.abar is not None else []


def _portable(traj):
    """Strip closures so a trajectory can cross process boundaries."""
    traj.branches = None
    traj.monitors = [SimpleNamespace(track=traj.track)] if traj.track is not None else []
    return traj


def simulate(cfg: ExperimentConfig, amplitude: Optional[float] = None, n_cells: Optional[int] = None):
    if n_cells is not None:
        cfg = _with_cells(cfg, n_cells)
    params = cfg.params()
    branches = branches_from_spec(cfg.problem.branches)
    phi = phi_from_spec(cfg.problem, params.grid, branches, cfg.seed, amplitude)
    xi0 = xi0_from_spec(cfg.problem, params.grid)
    return solve(phi, xi0, branches, params, _monitors(cfg))


def _with_cells(cfg, n_cells):
    new = ExperimentConfig(**{**cfg.__dict__})
    new.solver = SolverConfig(**{**asdict(cfg.solver), "n_cells": int(n_cells)})
    return new


def _nullcline_branches(cfg):
    spec = dict(cfg.problem.branches)
    if spec.get("type") != "nullcline":
        spec = {"type": "nullcline", "model": "cubic"}
    model = nullcline_from_spec(spec)
    detect_folds(model, tuple(spec.get("v_range", (-3.0, 3.0))))
    br = extract_branches(model, tuple(spec.get("u_range", (-1.0, 1.0))), int(spec.get("resolution", 200)))
    return model, br


def slowfast_pair(cfg: ExperimentConfig, epsilon: Optional[float] = None):
    """Slow-fast run and its hysteresis limit on the same data."""
    eps = cfg.problem.epsilon if epsilon is None else epsilon
    params = cfg.params()
    model, br = _nullcline_branches(cfg)
    phi = phi_from_spec(cfg.problem, params.grid, br, cfg.seed)
    xi0 = xi0_from_spec(cfg.problem, params.grid)
    f = source_from_name(cfg.problem.source)
    slow = solve_slowfast(phi, br.evaluate(xi0, phi), model, f, eps, params)
    hyst = solve_hysteresis_limit(phi, xi0, br, f, params, _monitors(cfg))
    return slow, hyst


# ---------------------------------------------------------------------------
# sweep workers (top level so they pickle)
# ---------------------------------------------------------------------------

def _sweep_point(args):
    cfg, axis, value = args
    try:
        if axis == "perturbation":
            return _portable(simulate(cfg, amplitude=float(value)))
        if axis == "grid":
            return _portable(simulate(cfg, n_cells=int(value)))
        slow, hyst = slowfast_pair(cfg, float(value))
        rep = compare_to_hysteresis(slow, hyst, float(cfg.compare.get("burn_in", 0.0)),
                                    cfg.compare.get("tube_r"))
        return {"status": slow.status, "sup_dev_u": rep.sup_dev_u, "sup_dev_v": rep.sup_dev_v,
                "max_offset": rep.max_offset}
    except HysteresisError as exc:
        return {"status": f"error: {type(exc).__name__}: {exc}"}


def _b_end(traj):
    tr = traj.track
    return tr.b_values[-1] if tr is not None and tr.b_values else None


def _cauchy(coarse, fine):
    """Space-time sup of ``u_coarse - u_fine`` at shared nodes and save times."""
    nc, nf = coarse.grid.n_cells, fine.grid.n_cells
    if nf % nc:
        return None
    r = nf // nc
    tf = {round(s.t, 12): s for s in fine.snapshots}
    d = [np.max(np.abs(s.u - tf[round(s.t, 12)].u[::r])) for s in coarse.snapshots
         if round(s.t, 12) in tf]
    return float(max(d)) if d else None


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> list:
    """Rows of the aggregated sweep table, in the order of ``sweep.values``."""
    axis, values = cfg.sweep["axis"], list(cfg.sweep["values"])
    tasks = [(cfg, axis, v) for v in values]
    if axis == "perturbation":
        tasks.insert(0, (cfg, axis, 0.0))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = []
    if axis == "epsilon":
        for v, res in zip(values, results):
            rows.append({"axis": axis, "value": v, **res})
        return rows
    if axis == "perturbation":
        ref, results = results[0], results[1:]
    for k, (v, res) in enumerate(zip(values, results)):
        row = {"axis": axis, "value": v}
        if isinstance(res, dict):
            rows.append({**row, **res})
            continue
        row.update(status=res.status, b_end=_b_end(res))
        if axis == "perturbation" and not isinstance(ref, dict):
            try:
                rep = check_lemma_b_estimate(ref, res)
                row.update(lhs=rep.lhs, rhs=rep.rhs, holds=rep.holds, sup_dev_u=rep.rhs * ref.track.phibar)
            except (WindowEmpty, ValueError) as exc:
                row["holds"] = f"n/a: {exc}"
        if axis == "grid" and k + 1 < len(results) and not isinstance(results[k + 1], dict):
            row["sup_dev_u"] = _cauchy(res, results[k + 1])
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# artifacts
# ---------------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_fmt)
        fh.write("\n")


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, cfg: ExperimentConfig, status: str, files: list) -> None:
    cfg_hash = hashlib.sha256(json.dumps(cfg.as_dict(), sort_keys=True).encode()).hexdigest()
    lines = [f"version {__version__}", f"kind {cfg.kind}", f"config_sha256 {cfg_hash}",
             f"seed {cfg.seed}", f"status {status}"]
    lines += [f"file {name} sha256 {sha256_file(out / name)}" for name in sorted(files)]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# kinds
# ---------------------------------------------------------------------------

def _run_simulate(cfg, out, jobs):
    traj = simulate(cfg)
    write_trajectory_csv(out / "traj.csv", traj)
    files = ["traj.csv", "summary.json"]
    if traj.track is not None:
        traj.track.write_csv(out / "track.csv")
        files.append("track.csv")
    write_json(out / "summary.json", run_summary(traj))
    return traj.status, files


def _run_slowfast(cfg, out, jobs):
    params = cfg.params()
    model, br = _nullcline_branches(cfg)
    phi = phi_from_spec(cfg.problem, params.grid, br, cfg.seed)
    xi0 = xi0_from_spec(cfg.problem, params.grid)
    traj = solve_slowfast(phi, br.evaluate(xi0, phi), model, source_from_name(cfg.problem.source),
                          cfg.problem.epsilon, params)
    write_trajectory_csv(out / "traj.csv", traj)
    br.H1.func.write_csv(out / "branch_H1.csv")
    br.H2.func.write_csv(out / "branch_H2.csv")
    write_json(out / "summary.json", run_summary(traj))
    return traj.status, ["traj.csv", "branch_H1.csv", "branch_H2.csv", "summary.json"]


def _run_verify(cfg, out, jobs):
    spec, v = cfg.problem.branches, cfg.verify
    br = branches_from_spec(spec)
    which = v.get("branch", "H2")
    sigma = float(v.get("sigma", br.sigma))
    U = float(v.get("U", 1.0))
    samples, refinements = int(v.get("samples", 64)), int(v.get("refinements", 3))
    if which == "H2":
        rep = verify_branch_condition(br.H2, br.alpha, LOWER_CUTOFF_ALPHA, sigma, U, samples, refinements)
    elif which == "H1":
        rep = verify_branch_condition(br.H1, br.beta, UPPER_CUTOFF_BETA, sigma, U, samples, refinements)
    else:
        raise ConfigError("verify.branch must be H1 or H2", field="verify.branch",
                          line=_line_of(cfg.text, "branch"))
    report = {"branch": which, "sigma": sigma, "U": U, "M_estimate": rep.M_estimate,
              "violated": rep.violated, "max_ratio_location": rep.max_ratio_location,
              "history": rep.history, "levels": rep.levels}
    if spec.get("type") == "nullcline":
        model = nullcline_from_spec(spec)
        detect_folds(model, tuple(spec.get("v_range", (-3.0, 3.0))))
        lem = verify_lemma_A1(br, model)
        report["fold_inequality"] = {"M_estimate": lem.M_estimate, "holds": lem.holds,
                                     "n": model.detected.n}
    write_json(out / "verify.json", report)
    write_rows(out / "verify.csv", ["samples", "M"],
               [{"samples": s, "M": m} for s, m in zip(rep.levels, rep.history)])
    return COMPLETED, ["verify.json", "verify.csv"]


def _run_sweep(cfg, out, jobs):
    rows = run_sweep(cfg, jobs)
    write_rows(out / "sweep.csv", SWEEP_COLUMNS, rows)
    return COMPLETED, ["sweep.csv"]


def _run_compare(cfg, out, jobs):
    slow, hyst = slowfast_pair(cfg)
    c = cfg.compare
    rep = compare_to_hysteresis(slow, hyst, float(c.get("burn_in", 0.0)), c.get("tube_r"))
    write_rows(out / "compare.csv", ["epsilon", "sup_dev_u", "sup_dev_v", "max_offset", "tube_r", "n_times"],
               [{"epsilon": cfg.problem.epsilon, "sup_dev_u": rep.sup_dev_u, "sup_dev_v": rep.sup_dev_v,
                 "max_offset": rep.max_offset, "tube_r": rep.tube_r, "n_times": rep.n_times}])
    x = cfg.params().grid.nodes
    write_rows(out / "offsets.csv", ["x", "offset"],
               [{"x": xi, "offset": o} for xi, o in zip(x, rep.switch_time_offsets)])
    return hyst.status, ["compare.csv", "offsets.csv"]


def _run_kernel(cfg, out, jobs):
    k = cfg.kernel
    params = cfg.params()
    node = int(k.get("source_node", params.grid.n_cells // 2))
    if not 0 <= node <= params.grid.n_cells:
        raise ConfigError("kernel.source_node outside the grid", field="kernel.source_node",
                          line=_line_of(cfg.text, "source_node"))
    times = k.get("times") or list(np.geomspace(1e-3, 1e-2, 10))
    rep = heat_kernel_bound_check(params, node, times)
    bound = float(k.get("bound", KERNEL_BOUND))
    write_rows(out / "kernel.csv", ["t", "sup", "scaled"],
               [{"t": t, "sup": s, "scaled": c} for t, s, c in zip(rep.times, rep.sup_values, rep.scaled)])
    write_json(out / "kernel.json", {"bound": bound, "max_scaled": float(np.max(rep.scaled)),
                                     "within_bound": bool(np.max(rep.scaled) <= bound),
                                     "trend": rep.trend, "bounded": rep.bounded})
    return COMPLETED, ["kernel.csv", "kernel.json"]


RUNNERS = {"simulate": _run_simulate, "slowfast": _run_slowfast, "verify-branch": _run_verify,
           "sweep": _run_sweep, "compare": _run_compare, "kernel-check": _run_kernel}


def run(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> int:
    out.mkdir(parents=True, exist_ok=True)
    status, files = RUNNERS[cfg.kind](cfg, out, jobs)
    write_manifest(out, cfg, status, files)
    return EXIT.get(status, 0)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hystereact", description=__doc__.splitlines()[0])
    ap.add_argument("kind", choices=KINDS)
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--out", help="output directory (overrides output.directory)")
    ap.add_argument("--jobs", type=int, default=int(os.environ.get("HYSTEREACT_JOBS", "1")),
                    help="worker processes for sweeps (default $HYSTEREACT_JOBS or 1)")
    args = ap.parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text, args.kind)
        out = Path(args.out or cfg.output.directory)
        code = run(cfg, out, max(1, args.jobs))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DomainViolation as exc:
        print(f"domain violation: {exc}", file=sys.stderr)
        return EXIT[DOMAIN_VIOLATION]
    except HysteresisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{cfg.kind}: exit {code}, artifacts in {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
