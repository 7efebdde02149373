import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hystereact.errors import DomainViolation, InconsistentInitialData
from hystereact.field import (
    Grid, advance_field, check_consistent, drive_relays, init_field, read_snapshot_csv,
    step_config, write_snapshot_csv,
)
from hystereact.relay import (
    BranchPair, RelayState, constant_branch, initial_config, output, update_config,
)


def test_grid_nodes():
    g = Grid(400)
    x = g.nodes
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(np.diff(x), g.h, rtol=1e-12)
    with pytest.raises(ValueError):
        Grid(0)


def test_step_config_snaps_left_inclusive():
    g = Grid(10)
    xi = step_config(g, 0.4)
    assert list(xi[:5]) == [1] * 5 and list(xi[5:]) == [2] * 6
    # 0.43 snaps to node 0.4
    assert list(step_config(g, 0.43)) == list(xi)


class TestConsistency:
    def test_literal_reading(self, unit_affine):
        assert check_consistent([0.5, 0.5], [1, 2], unit_affine, literal=True).ok
        res = check_consistent([1.5], [2], unit_affine, literal=True)
        assert not res.ok and res.node == 0
        assert check_consistent([-0.5], [2], unit_affine, literal=True).ok

    def test_switching_reading(self, unit_affine):
        assert check_consistent([0.5, 0.5], [1, 2], unit_affine).ok
        assert check_consistent([1.5], [2], unit_affine).ok
        assert check_consistent([-0.5], [1], unit_affine).ok
        assert check_consistent([0.2, -0.5], [1, 2], unit_affine).node == 1

    def test_prototype_is_consistent(self, cubic):
        g = Grid(400)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        assert check_consistent(phi, step_config(g, 0.4), cubic).ok


class TestInitField:
    def test_prototype_split(self, cubic):
        g = Grid(400)
        phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
        st_ = init_field(phi, step_config(g, 0.4), cubic)
        left = g.nodes <= 0.4
        np.testing.assert_array_equal(st_.v[left], cubic.H1(phi[left]))
        np.testing.assert_array_equal(st_.v[~left], cubic.H2(phi[~left]))
        assert st_.t == 0.0

    def test_above_beta_starts_on_two(self, unit_affine):
        st_ = init_field([1.5, 2.0], [2, 2], unit_affine)
        assert list(st_.config) == [2, 2]

    def test_inside_keeps_one(self, cubic):
        phi = np.linspace(-0.3, 0.3, 7)
        st_ = init_field(phi, np.ones(7, dtype=int), cubic)
        np.testing.assert_array_equal(st_.v, cubic.H1(phi))

    def test_inconsistent(self, unit_affine):
        with pytest.raises(InconsistentInitialData):
            init_field([1.5], [1], unit_affine)


class TestAdvance:
    def test_no_motion(self, cubic):
        phi = np.linspace(-0.3, 0.3, 7)
        s0 = init_field(phi, [1, 2, 1, 2, 1, 2, 1], cubic)
        s1 = advance_field(s0, phi, 0.1, cubic)
        np.testing.assert_array_equal(s1.v, s0.v)
        assert s1.t == 0.1

    def test_single_crossing(self, unit_affine):
        s0 = init_field([0.5, 0.5, 0.5], [1, 1, 1], unit_affine)
        s1 = advance_field(s0, [0.5, 1.2, 0.9], 1.0, unit_affine)
        assert list(s1.config) == [1, 2, 1]

    def test_all_down(self, unit_affine):
        s0 = init_field([0.5] * 4, [2] * 4, unit_affine)
        s1 = advance_field(s0, [-0.1] * 4, 1.0, unit_affine)
        assert list(s1.config) == [1] * 4

    def test_time_must_increase(self, unit_affine):
        s0 = init_field([0.5], [1], unit_affine)
        with pytest.raises(ValueError):
            advance_field(s0, [0.5], 0.0, unit_affine)

    def test_domain_violation_names_node(self):
        br = BranchPair(0.0, 1.0, constant_branch(0.0, hi=1.0), constant_branch(1.0, lo=0.0))
        s0 = init_field([0.5, 0.5], [1, 1], br)
        s0.config[1] = 1
        s0.last_input[1] = 2.0  # corrupt: config 1 stuck above beta
        with pytest.raises(DomainViolation) as info:
            advance_field(s0, [0.5, 2.0], 1.0, br)
        assert info.value.node == 1

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.lists(st.floats(-1.0, 2.0), min_size=5, max_size=5), min_size=2, max_size=12),
           st.lists(st.sampled_from([1, 2]), min_size=5, max_size=5))
    def test_pointwise_independence(self, history, xi0):
        br = BranchPair(0.0, 1.0, constant_branch(-1.0), constant_branch(1.0))
        xi0 = [initial_config(z, g, br) for z, g in zip(xi0, history[0])]
        states = drive_relays(Grid(4), list(range(len(history))), [np.array(h) for h in history], xi0, br)
        for node in range(5):
            rs = RelayState(initial_config(xi0[node], history[0][node], br), history[0][node])
            for k in range(1, len(history)):
                rs = update_config(rs, history[k][node], br)
                assert states[k].config[node] == rs.config
                assert states[k].v[node] == output(rs, history[k][node], br)


def test_snapshot_roundtrip(tmp_path, cubic):
    g = Grid(8)
    phi = cubic.alpha + 0.6 * (g.nodes - 0.4)
    s = init_field(phi, step_config(g, 0.4), cubic)
    p = tmp_path / "snap.csv"
    write_snapshot_csv(p, g, s)
    back = read_snapshot_csv(p)
    np.testing.assert_array_equal(back["u"], s.u)
    np.testing.assert_array_equal(back["v"], s.v)
    np.testing.assert_array_equal(back["config"], s.config)
    assert p.read_text().splitlines()[0] == "x,u,v,config"
