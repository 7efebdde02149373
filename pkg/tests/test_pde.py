import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import solve_banded

from hystereact.field import Grid, init_field, step_config
from hystereact.pde import (
    COMPLETED, SolverParams, diffuse, heat_kernel_bound_check, kernel_fields,
    reduce_general_rhs, run_summary, solve, step, write_trajectory_csv,
)
from hystereact.relay import BranchPair, constant_branch, cubic_branch_pair, affine_branch
from hystereact.transverse import FreeBoundaryMonitor
from hystereact.tridiag import solve_tridiagonal
from oracles import dense_heat_step_matrix


def zero_branches():
    return BranchPair(0.0, 1.0, constant_branch(0.0), constant_branch(0.0))


def eigenmode_error(n_cells, dt, theta, T=0.1):
    g = Grid(n_cells)
    u = np.cos(np.pi * g.nodes)
    zero = np.zeros_like(u)
    for _ in range(round(T / dt)):
        u = diffuse(u, zero, dt, theta, g)
    return np.max(np.abs(u - math.exp(-np.pi ** 2 * T) * np.cos(np.pi * g.nodes)))


def trapezoid_mean(u, h):
    return h * (u[1:-1].sum() + 0.5 * (u[0] + u[-1]))


class TestTridiagonal:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 2 ** 31))
    def test_against_lapack(self, n, seed):
        rng = np.random.default_rng(seed)
        lower, upper = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        diag = 3.0 + rng.uniform(0, 1, n)
        rhs = rng.normal(size=n)
        ab = np.zeros((3, n))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag
        ab[2, :-1] = lower[1:]
        np.testing.assert_allclose(solve_tridiagonal(lower, diag, upper, rhs),
                                   solve_banded((1, 1), ab, rhs), rtol=1e-12, atol=1e-12)

    def test_step_matches_dense(self):
        g = Grid(12)
        rng = np.random.default_rng(3)
        u, v = rng.normal(size=13), rng.normal(size=13)
        A, B = dense_heat_step_matrix(12, 0.01, 0.5)
        np.testing.assert_allclose(diffuse(u, v, 0.01, 0.5, g),
                                   np.linalg.solve(A, B @ u + 0.01 * v), rtol=1e-12, atol=1e-12)


class TestStep:
    def test_constant_preserved(self):
        br = zero_branches()
        params = SolverParams(Grid(50), 1e-3, 0.05)
        traj = solve(np.full(51, 0.3), np.full(51, 1), br, params)
        for s in traj.snapshots:
            np.testing.assert_allclose(s.u, 0.3, rtol=0, atol=1e-15)

    def test_constant_source_exact(self):
        c = 0.7
        br = BranchPair(-10.0, 10.0, constant_branch(c), constant_branch(c))
        params = SolverParams(Grid(20), 1e-3, 0.02)
        traj = solve(np.zeros(21), np.ones(21, dtype=int), br, params)
        for m, s in enumerate(traj.snapshots):
            np.testing.assert_allclose(s.u, c * m * 1e-3, rtol=1e-12, atol=1e-15)

    def test_eigenmode_amplitude(self):
        g = Grid(400)
        params = SolverParams(g, 1e-4, 0.1)
        traj = solve(np.cos(np.pi * g.nodes), np.ones(401, dtype=int),
                     BranchPair(-10, 10, constant_branch(0.0), constant_branch(0.0)), params)
        # e^{-pi^2/10} = 0.372708...
        assert traj.final.u[0] == pytest.approx(math.exp(-np.pi ** 2 * 0.1), abs=1e-5)
        assert traj.final.u[0] == pytest.approx(0.37271, abs=1e-5)

    def test_spatial_order(self):
        e = [eigenmode_error(n, 1e-5, 0.5) for n in (10, 20)]
        assert e[0] / e[1] == pytest.approx(4.0, rel=0.2)

    @pytest.mark.parametrize("theta,expected,dts", [(0.5, 4.0, (0.02, 0.01)), (1.0, 2.0, (1e-3, 5e-4))])
    def test_temporal_order(self, theta, expected, dts):
        e = [eigenmode_error(800, dt, theta) for dt in dts]
        assert e[0] / e[1] == pytest.approx(expected, rel=0.2)

    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_mean_conserved(self, theta):
        g = Grid(64)
        rng = np.random.default_rng(0)
        u = rng.normal(size=65)
        m0 = trapezoid_mean(u, g.h)
        for _ in range(200):
            u = diffuse(u, np.zeros_like(u), 1e-3, theta, g)
        assert abs(trapezoid_mean(u, g.h) - m0) <= 1e-12 * max(1.0, abs(m0)) * 0.2

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=9, max_size=9), st.floats(1e-4, 1e-1))
    def test_maximum_principle(self, phi, dt):
        g = Grid(8)
        u = np.array(phi)
        lo, hi = u.min(), u.max()
        for _ in range(20):
            u = diffuse(u, np.zeros_like(u), dt, 1.0, g)
            assert lo - 1e-12 <= u.min() and u.max() <= hi + 1e-12

    def test_deterministic(self, cubic):
        g = Grid(100)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        p = SolverParams(g, 1e-4, 0.01)
        a = solve(phi, step_config(g, 0.4), cubic, p)
        b = solve(phi, step_config(g, 0.4), cubic, p)
        for x, y in zip(a.snapshots, b.snapshots):
            assert x.t == y.t
            assert np.array_equal(x.u, y.u) and np.array_equal(x.v, y.v)

    def test_bad_params(self):
        with pytest.raises(ValueError):
            SolverParams(Grid(10), 0.0, 1.0)
        with pytest.raises(ValueError):
            SolverParams(Grid(10), 0.1, 1.0, theta=0.3)
        with pytest.raises(ValueError):
            SolverParams(Grid(10), 0.1, 1.0, overshoot_policy="explode")


def prototype(cubic, n_cells, dt, T=0.05, policy="halt"):
    g = Grid(n_cells)
    phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
    return solve(phi, step_config(g, 0.4), cubic, SolverParams(g, dt, T, 0.5, policy),
                 [FreeBoundaryMonitor(0.4)])


class TestSolve:
    def test_prototype_against_fine_run(self, cubic):
        ref = prototype(cubic, 400, 1e-4)
        fine = prototype(cubic, 1600, 1.25e-5)
        assert ref.status == COMPLETED and fine.status == COMPLETED
        assert abs(ref.track.b_values[-1] - fine.track.b_values[-1]) <= 2 / 400

    def test_zero_horizon(self, cubic):
        g = Grid(10)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        traj = solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-4, 0.0))
        assert len(traj.snapshots) == 1
        np.testing.assert_array_equal(traj.snapshots[0].u, phi)

    def test_frozen_configuration(self, cubic):
        # phi(abar) above alpha, no beta root left of abar, no alpha root right of it
        g = Grid(400)
        phi = cubic.alpha + 0.1 + 0.6 * (g.nodes - 0.4)
        traj = solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-4, 0.01))
        assert traj.status == COMPLETED and traj.n_switches == 0
        assert all(np.array_equal(s.config, traj.snapshots[0].config) for s in traj.snapshots)

    def test_save_stride(self, cubic):
        g = Grid(50)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        traj = solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-3, 0.01, save_stride=3))
        assert np.allclose(traj.times, [0, 0.003, 0.006, 0.009, 0.01])

    def test_sharpening_close_to_plain(self, cubic):
        plain = prototype(cubic, 200, 1e-4, T=0.02)
        sharp = prototype(cubic, 200, 1e-4, T=0.02, policy="subdivide")
        assert sharp.status == COMPLETED
        assert np.max(np.abs(plain.final.u - sharp.final.u)) < 1e-3
        assert np.array_equal(plain.final.config, sharp.final.config)

    def test_domain_violation_status(self):
        # a tabulated-style H2 that stops short of the values reached by u
        br = BranchPair(0.0, 1.0, constant_branch(-1.0), affine_branch(0.0, 5.0, lo=0.0, hi=0.55))
        g = Grid(10)
        traj = solve(np.full(11, 0.5), np.full(11, 2), br, SolverParams(g, 1e-2, 1.0))
        assert traj.status == "domain_violation"
        assert traj.snapshots[-1].t < 1.0

    def test_export(self, tmp_path, cubic):
        traj = prototype(cubic, 20, 1e-3, T=0.003)
        p = tmp_path / "traj.csv"
        write_trajectory_csv(p, traj)
        lines = p.read_text().splitlines()
        assert lines[0] == "t,x,u,v,config"
        assert len(lines) == 1 + 21 * len(traj.snapshots)
        summary = run_summary(traj)
        assert summary["status"] == COMPLETED and "free_boundary" in summary


class TestReduce:
    def test_identity(self, cubic):
        red = reduce_general_rhs(lambda u, v: v, cubic)
        u = np.linspace(-0.3, 0.3, 5)
        np.testing.assert_array_equal(red.H1(u), cubic.H1(u))
        assert red.sigma == cubic.sigma

    def test_linear(self):
        br = BranchPair(0.0, 1.0, constant_branch(0.0), constant_branch(1.0))
        red = reduce_general_rhs(lambda u, v: -u + v, br)
        assert red.H1(0.3) == pytest.approx(-0.3)
        assert red.H2(0.3) == pytest.approx(0.7)

    def test_product(self, cubic):
        red = reduce_general_rhs(lambda u, v: u * v, cubic)
        assert red.H2(0.0) == 0.0
        assert red.H2(cubic.alpha) == pytest.approx(cubic.alpha / math.sqrt(3), abs=1e-12)


class TestKernel:
    def test_center_value(self):
        params = SolverParams(Grid(800), 1e-6, 1e-2, theta=1.0)
        times = np.geomspace(1e-3, 1e-2, 5)
        rep = heat_kernel_bound_check(params, 400, times)
        np.testing.assert_allclose(rep.scaled, 1 / (2 * math.sqrt(math.pi)), rtol=0.05)
        assert rep.bounded

    def test_long_time_mass(self):
        params = SolverParams(Grid(40), 1e-2, 5.0, theta=1.0)
        rep = heat_kernel_bound_check(params, 20, [5.0])
        assert rep.sup_values[0] == pytest.approx(1.0, abs=1e-6)

    def test_growth_detected_late(self):
        params = SolverParams(Grid(40), 1e-2, 5.0, theta=1.0)
        rep = heat_kernel_bound_check(params, 20, [1.0, 2.0, 4.0])
        assert not rep.bounded

    def test_superposition(self):
        params = SolverParams(Grid(100), 1e-5, 1e-3)
        a = kernel_fields(params, 30, [1e-3])[0]
        b = kernel_fields(params, 70, [1e-3])[0]
        ab = kernel_fields(params, [30, 70], [1e-3])[0]
        np.testing.assert_allclose(ab, a + b, rtol=1e-12, atol=1e-12)
