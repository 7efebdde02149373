import numpy as np
import pytest

from hystereact.errors import DomainViolation, MultipleRoots, WindowEmpty
from hystereact.field import FieldState, Grid, step_config
from hystereact.pde import COMPLETED, TRANSVERSALITY_LOST, SolverParams, solve
from hystereact.relay import BranchPair, affine_branch
from hystereact.transverse import (
    LOST, FreeBoundaryMonitor, FreeBoundaryTrack, check_lemma_b_estimate, check_prototype,
    check_transverse, compute_delta, hysteresis_from_free_boundary, locate_a,
)


@pytest.fixture
def unit():
    return BranchPair(0.0, 1.0, affine_branch(1.0, 0.0, hi=1.0), affine_branch(1.0, 0.0, lo=0.0))


def bare_state(u, t=0.0):
    u = np.asarray(u, dtype=float)
    return FieldState(t, u, np.zeros_like(u), np.ones(u.size, dtype=np.int8), u.copy())


class TestCheckTransverse:
    def test_flat_touch_with_matching_config(self, unit):
        g = Grid(100)
        phi = (g.nodes - 0.5) ** 2
        assert check_transverse(phi, np.ones(101, dtype=int), unit, g).ok

    def test_flat_touch_wrong_config(self, unit):
        g = Grid(100)
        phi = (g.nodes - 0.5) ** 2
        xi = np.ones(101, dtype=int)
        xi[48:53] = 2
        res = check_transverse(phi, xi, unit, g)
        assert not res.ok
        assert res.diagnostics["offending"][0]["node"] == 50

    def test_neighbourhood_matters(self, unit):
        g = Grid(100)
        phi = (g.nodes - 0.5) ** 2
        xi = np.ones(101, dtype=int)
        xi[52] = 2  # within 2h of the touching node
        assert not check_transverse(phi, xi, unit, g).ok

    def test_strictly_inside(self, unit):
        g = Grid(50)
        phi = 0.5 + 0.3 * np.sin(7 * g.nodes)
        xi = np.where(g.nodes < 0.3, 1, 2)
        assert check_transverse(phi, xi, unit, g).ok


class TestCheckPrototype:
    def test_linear(self):
        g = Grid(400)
        br = BranchPair(0.0, 10.0, affine_branch(0, -1), affine_branch(0, 1))
        phi = 0.6 * (g.nodes - 0.4)
        res = check_prototype(phi, step_config(g, 0.4), 0.4, g, br)
        assert res.ok
        assert res.diagnostics["phibar"] == pytest.approx(0.3, abs=1e-12)

    def test_second_root(self):
        g = Grid(100)
        br = BranchPair(0.0, 10.0, affine_branch(0, -1), affine_branch(0, 1))
        phi = np.sin(2 * np.pi * (g.nodes - 0.4)) * 0.3  # crosses 0 again at 0.9
        res = check_prototype(phi, step_config(g, 0.4), 0.4, g, br)
        assert not res.ok and 3 in res.diagnostics["failed_items"]

    def test_flat_at_abar(self):
        g = Grid(100)
        br = BranchPair(0.0, 10.0, affine_branch(0, -1), affine_branch(0, 1))
        phi = np.abs(g.nodes - 0.4)  # kink: centered slope 0 at abar
        res = check_prototype(phi, step_config(g, 0.4), 0.4, g, br)
        assert not res.ok and 4 in res.diagnostics["failed_items"]

    def test_beta_root_left(self):
        g = Grid(100)
        br = BranchPair(0.0, 0.1, affine_branch(0, -1), affine_branch(0, 1))
        phi = 0.6 * (g.nodes - 0.4) + 0.5 * (g.nodes < 0.1)
        res = check_prototype(phi, step_config(g, 0.4), 0.4, g, br)
        assert 2 in res.diagnostics["failed_items"]


class TestLocate:
    def test_linear_root_on_node(self):
        g = Grid(100)
        tr = FreeBoundaryTrack(0.5, 0.0, 0.5, 0.1)
        assert locate_a(bare_state(g.nodes - 0.5), tr, g) == 0.5

    def test_running_max(self):
        tr = FreeBoundaryTrack(0.5, 0.0, 0.5, 0.1)
        for t, a in enumerate([0.5, 0.52, 0.51, 0.55]):
            tr.record(t, a)
        assert tr.b_values == [0.5, 0.52, 0.52, 0.55]

    def test_two_roots_lost(self):
        g = Grid(100)
        tr = FreeBoundaryTrack(0.5, 0.0, 0.5, 0.2)
        u = np.cos(2 * np.pi * (g.nodes - 0.5)) - 0.5  # two crossings in [0.3, 1]
        with pytest.raises(MultipleRoots):
            locate_a(bare_state(-u), tr, g)
        assert tr.status[-1] == LOST

    def test_delta(self):
        g = Grid(100)
        phi = 0.6 * (g.nodes - 0.4)
        assert compute_delta(phi, 0.4, g, 0.3) == pytest.approx(0.2)
        phi2 = np.where(g.nodes < 0.35, 0.0, phi + 0.03)
        assert compute_delta(phi2, 0.4, g, 0.3) == pytest.approx(0.04)


class TestDualRepresentation:
    def test_boundary_cases(self, cubic):
        u = np.linspace(-0.3, 0.3, 11)
        s = bare_state(u)
        v0 = hysteresis_from_free_boundary(s, 0.0, cubic)
        assert v0[0] == cubic.H1(u[0])
        np.testing.assert_array_equal(v0[1:], cubic.H2(u[1:]))
        np.testing.assert_array_equal(hysteresis_from_free_boundary(s, 1.0, cubic), cubic.H1(u))

    def test_domain_violation(self, cubic):
        u = np.full(5, cubic.alpha - 0.1)
        with pytest.raises(DomainViolation):
            hysteresis_from_free_boundary(bare_state(u), 0.0, cubic)

    def test_matches_relays_on_run(self, cubic):
        g = Grid(200)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        mon = FreeBoundaryMonitor(0.4)
        traj = solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-4, 0.03), [mon])
        assert traj.status == COMPLETED
        for s in traj.snapshots:
            b = mon.track.b_at(s.t)
            bad = np.flatnonzero(hysteresis_from_free_boundary(s, b, cubic) != s.v)
            assert bad.size <= 1
            assert np.all(np.abs(g.nodes[bad] - b) <= g.h)


@pytest.fixture(scope="module")
def run(cubic):
    g = Grid(400)
    phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
    mon = FreeBoundaryMonitor(0.4)
    traj = solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-4, 0.05), [mon])
    return traj, mon.track, g


class TestTrackInvariants:
    def test_running_max_exact(self, run):
        _, tr, _ = run
        a = np.array(tr.a_values)
        assert np.array_equal(np.maximum.accumulate(a), np.array(tr.b_values))

    def test_b_monotone_and_in_window(self, run):
        _, tr, _ = run
        b = np.array(tr.b_values)
        assert np.all(np.diff(b) >= 0)
        assert np.all((b >= tr.abar) & (b <= tr.abar + tr.delta))

    def test_slope_and_beta_monitors(self, run, cubic):
        traj, tr, g = run
        window = np.abs(g.nodes - tr.abar) <= tr.delta
        for s in traj.snapshots:
            assert np.all(np.gradient(s.u, g.h)[window] >= tr.phibar)
            assert np.all(s.u[g.nodes <= tr.b_at(s.t)] < cubic.beta)

    def test_config_one_is_interval(self, run):
        traj, tr, g = run
        for s in traj.snapshots:
            ones = np.flatnonzero(s.config == 1)
            assert ones[0] == 0 and np.all(np.diff(ones) == 1)


class TestMonitorLoss:
    def test_slope_loss_stops_run(self, unit):
        g = Grid(100)
        phi = 0.6 * (g.nodes - 0.4)
        # a huge fixed phibar makes the slope monitor fire at once
        mon = FreeBoundaryMonitor(0.4, phibar=5.0, delta=0.1)
        traj = solve(phi, step_config(g, 0.4), unit, SolverParams(g, 1e-4, 0.01), [mon])
        assert traj.status == TRANSVERSALITY_LOST
        assert len(traj.snapshots) == 1

    def test_front_exit_is_lost(self):
        # H1 strongly negative drags the whole profile below alpha
        br = BranchPair(0.0, 1.0, affine_branch(0.0, -50.0), affine_branch(0.0, -50.0))
        g = Grid(100)
        phi = 0.6 * (g.nodes - 0.4)
        mon = FreeBoundaryMonitor(0.4)
        traj = solve(phi, step_config(g, 0.4), br, SolverParams(g, 1e-3, 0.1), [mon])
        assert traj.status == TRANSVERSALITY_LOST
        assert mon.track.reason


class TestLemmaEstimate:
    def _run(self, cubic, g, eps, T=0.02):
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4) + eps * np.cos(np.pi * g.nodes)
        return solve(phi, step_config(g, 0.4), cubic, SolverParams(g, 1e-4, T),
                     [FreeBoundaryMonitor(0.4, phibar=0.3)])

    def test_identical(self, cubic):
        g = Grid(100)
        a = self._run(cubic, g, 0.0)
        r = check_lemma_b_estimate(a, a)
        assert r.lhs == 0 and r.rhs == 0 and r.holds

    def test_perturbations(self, cubic):
        g = Grid(400)
        ref = self._run(cubic, g, 0.0)
        lhs = []
        for eps in (1e-3, 1e-4, 1e-5):
            r = check_lemma_b_estimate(ref, self._run(cubic, g, eps))
            assert r.holds
            lhs.append(r.lhs)
        assert lhs[0] > lhs[1] > lhs[2]

    def test_empty_window(self, cubic):
        g = Grid(50)
        a = self._run(cubic, g, 0.0, T=0.001)
        b = self._run(cubic, g, 0.0, T=0.001)
        b.snapshots = b.snapshots[1:]
        b.track.status = [LOST] * len(b.track.status)
        with pytest.raises(WindowEmpty):
            check_lemma_b_estimate(a, b)
