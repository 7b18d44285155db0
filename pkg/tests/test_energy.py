import numpy as np
import pytest

from shsys import profiles
from shsys.energy import (LinearSystem, c_matrix, cone_slope, damping_lambda,
                          energy, support_test)
from shsys.grid import GridField
from shsys.lxf import SchemeConfig, run
from shsys.models import advection_law, maxwell_system

RNG = np.random.default_rng(31415)


def grid_1d(cells, extent=2.0, m=1, boundary="periodic", center=True):
    h = extent / cells
    origin = -extent / 2 + h / 2 if center else h / 2
    return GridField.zeros((cells,), h, origin, m, boundary)


class TestEnergy:
    def test_zero_field(self):
        g = grid_1d(16)
        assert energy(g, np.array([[1.0]])) == 0.0

    def test_constant_scalar_total_length(self):
        g = grid_1d(20, extent=2.0)
        g = g.with_data(np.ones((20, 1)))
        assert energy(g, np.array([[1.0]])) == pytest.approx(2.0, rel=1e-14)

    def test_diagonal_weight(self):
        g = GridField.zeros((1,), 1.0, 0.0, 2)
        g = g.with_data(np.ones((1, 2)))
        q = np.diag([2.0, 3.0])
        assert energy(g, q) == pytest.approx(5.0, rel=1e-14)

    def test_norm_equivalence_with_extreme_pivots(self):
        g = grid_1d(32, m=2)
        g = g.with_data(RNG.normal(size=(32, 2)))
        q = np.diag([0.5, 4.0])
        norm2 = float(np.sum(g.data ** 2)) * g.cell_volume()
        e = energy(g, q)
        assert 0.5 * norm2 <= e <= 4.0 * norm2

    def test_callable_q(self):
        g = grid_1d(8)
        g = g.with_data(np.ones((8, 1)))
        e = energy(g, lambda t, x: np.array([[2.0]]))
        assert e == pytest.approx(2.0 * 8 * g.h[0], rel=1e-14)

    def test_rejects_nonfinite(self):
        g = grid_1d(8)
        data = np.zeros((8, 1))
        data[3, 0] = np.nan
        with pytest.raises(ValueError):
            energy(g.with_data(data), np.eye(1))


class TestCMatrix:
    def test_constant_coefficients(self):
        sys = LinearSystem(1, 2, np.eye(2), [np.eye(2)], b=np.eye(2))
        assert np.allclose(c_matrix(sys, 0.3, [0.1]), 2.0 * np.eye(2), atol=1e-12)

    def test_time_dependent_q(self):
        sys = LinearSystem(1, 1, lambda t, x: np.array([[1.0 + t]]),
                           [np.array([[0.0]])])
        assert c_matrix(sys, 0.0, [0.0])[0, 0] == pytest.approx(-1.0, abs=1e-9)

    def test_space_dependent_a(self):
        sys = LinearSystem(1, 1, np.array([[1.0]]),
                           [lambda t, x: np.array([[x[0]]])])
        assert c_matrix(sys, 0.0, [0.7])[0, 0] == pytest.approx(-1.0, abs=1e-9)

    def test_exact_for_quadratic_coefficients(self):
        sys = LinearSystem(1, 1, lambda t, x: np.array([[1.0 + t * t]]),
                           [lambda t, x: np.array([[2.0 + x[0] ** 2]])])
        c = c_matrix(sys, 0.5, [0.25])
        assert c[0, 0] == pytest.approx(-(2 * 0.5) - (2 * 0.25), abs=1e-8)


class TestDampingLambda:
    def test_halfway_threshold(self):
        # C = 2B = -I against Q = I: C + 2 lam Q PD exactly above lam = 1/2
        sys = LinearSystem(1, 2, np.eye(2), [np.zeros((2, 2))],
                           b=-0.5 * np.eye(2))
        result = damping_lambda(sys, [(0.0, np.zeros(1))])
        assert result.lam == pytest.approx(0.5, abs=1e-5)
        assert not result.marginal

    def test_already_positive(self):
        sys = LinearSystem(1, 2, np.eye(2), [np.zeros((2, 2))], b=np.eye(2))
        result = damping_lambda(sys, [(0.0, np.zeros(1))])
        assert result.lam == 0.0
        assert not result.marginal

    def test_semidefinite_edge_flagged(self):
        sys = LinearSystem(1, 2, np.eye(2), [np.zeros((2, 2))])
        result = damping_lambda(sys, [(0.0, np.zeros(1))])
        assert result.lam == 0.0
        assert result.marginal


class TestConeSlope:
    def test_scalar_advection(self):
        sys = LinearSystem(1, 1, np.array([[1.0]]), [np.array([[3.0]])])
        assert cone_slope(sys, grid_1d(8)) == pytest.approx(3.0, abs=1e-10)

    def test_maxwell_unit_slope(self):
        mx, _ = maxwell_system()
        sys = LinearSystem(3, 6, np.eye(6),
                           [mx.coeff[j + 1].const for j in range(3)])
        grid = GridField.zeros((4, 4, 4), 0.25, 0.0, 6)
        assert cone_slope(sys, grid) == pytest.approx(1.0, abs=1e-10)

    def test_no_advection(self):
        sys = LinearSystem(1, 2, np.eye(2), [np.zeros((2, 2))])
        assert cone_slope(sys, grid_1d(8, m=2)) == pytest.approx(0.0, abs=1e-12)


def advection_trace(cells=400, t_end=0.5, lam=1.0, radius=0.1):
    law, _ = advection_law(1.0)
    grid = grid_1d(cells, extent=4.0)
    initial = profiles.bump(grid, 1.0, radius)
    config = SchemeConfig(lam=lam, t_end=t_end, cfl_safety=1.0, output_stride=10)
    return run(law, initial, config)


class TestSupport:
    def test_zero_data_passes(self):
        law, _ = advection_law(1.0)
        grid = grid_1d(100, extent=4.0)
        config = SchemeConfig(lam=1.0, t_end=0.2, cfl_safety=1.0)
        trace = run(law, grid, config)
        verdict = support_test(trace, 0.1, 1.0)
        assert verdict.passed
        assert verdict.max_outside == 0.0

    def test_advection_cone_at_cfl_one(self):
        trace = advection_trace()
        verdict = support_test(trace, 0.1, 1.0, tol=0.0)
        assert verdict.passed

    def test_slow_cone_fails(self):
        trace = advection_trace()
        verdict = support_test(trace, 0.1, 0.5, tol=1e-12)
        assert not verdict.passed
        assert verdict.first_violation is not None
        t, x, value = verdict.first_violation
        assert value > 1e-12


class TestDampedEnergyBalance:
    def test_damped_energy_non_increasing(self):
        # Q = 1, A = 1, B = -1: C = -2, so lam* = 1; damp slightly above it
        sys = LinearSystem(1, 1, np.array([[1.0]]), [np.array([[1.0]])],
                           b=np.array([[-1.0]]))
        lam_star = damping_lambda(sys, [(0.0, np.zeros(1))]).lam
        assert lam_star == pytest.approx(1.0, abs=1e-5)
        lam_d = lam_star + 0.1

        grid = grid_1d(200, extent=2.0)
        initial = profiles.bump(grid, 1.0, 0.4)
        config = SchemeConfig(lam=0.5, t_end=0.8, output_stride=4)
        trace = run(sys.as_system(), initial, config)
        assert trace.completed
        k = config.lam * grid.h[0]
        values = [np.exp(-2.0 * lam_d * t) * energy(snap, np.array([[1.0]]))
                  for t, snap in zip(trace.times, trace.snapshots)]
        slack = 1.0 + 10.0 * k * grid.h[0]
        for prev, nxt in zip(values, values[1:]):
            assert nxt <= prev * slack + 1e-300

    def test_undamped_energy_grows_with_negative_c(self):
        sys = LinearSystem(1, 1, np.array([[1.0]]), [np.array([[1.0]])],
                           b=np.array([[-1.0]]))
        grid = grid_1d(200, extent=2.0)
        initial = profiles.bump(grid, 1.0, 0.4)
        config = SchemeConfig(lam=0.5, t_end=0.8, output_stride=4)
        trace = run(sys.as_system(), initial, config)
        e0 = energy(trace.snapshots[0], np.array([[1.0]]))
        e1 = energy(trace.snapshots[-1], np.array([[1.0]]))
        assert e1 > e0  # the u exp(-lam t) substitution is what restores decay


class TestLinearSystemValidation:
    def test_asymmetric_coefficient_rejected(self):
        with pytest.raises(ValueError):
            LinearSystem(1, 2, np.eye(2), [np.array([[0.0, 1.0], [0.0, 0.0]])],
                         check_points=[(0.0, np.zeros(1))])

    def test_q_must_be_positive(self):
        with pytest.raises(ValueError):
            LinearSystem(1, 2, -np.eye(2), [np.zeros((2, 2))],
                         check_points=[(0.0, np.zeros(1))])
