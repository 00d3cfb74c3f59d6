"""Tests for the heat and transport sub-solvers and their estimate monitors."""

import math

import numpy as np
import pytest

from lpmhd import (
    Field,
    HeatProblem,
    TimeSeriesField,
    TransportProblem,
    divergence_free_field,
    etd_phi1,
    etd_phi2,
    heat_estimate_report,
    interior_field,
    lp_norm,
    sample_rng,
    solve_heat,
    solve_transport,
    to_spectral,
    transport_estimate_report,
)


def _steady_velocity(grid, samples, T):
    v = Field(grid, samples)
    return TimeSeriesField(np.array([0.0, T]), [v, v])


class TestEtdPhi:
    def test_exact_values(self):
        np.testing.assert_allclose(etd_phi1(np.array([0.0])), [1.0], rtol=1e-15)
        np.testing.assert_allclose(etd_phi1(np.array([1.0])), [math.e - 1.0], rtol=1e-14)
        np.testing.assert_allclose(etd_phi2(np.array([0.0])), [0.5], rtol=1e-15)
        np.testing.assert_allclose(etd_phi2(np.array([1.0])), [math.e - 2.0], rtol=1e-13)

    def test_branch_continuity(self):
        z1 = np.array([-1.0000001e-12, -0.9999999e-12])
        vals = etd_phi1(z1)
        assert abs(vals[0] - vals[1]) < 1e-12
        z2 = np.array([-4.0000004e-4, -3.9999996e-4])
        vals = etd_phi2(z2)
        assert abs(vals[0] / vals[1] - 1.0) < 1e-10

    def test_vectorized_shape(self):
        z = -np.linspace(0.0, 5.0, 12).reshape(3, 4)
        assert etd_phi1(z).shape == (3, 4)
        assert etd_phi2(z).shape == (3, 4)


class TestHeatSolver:
    def test_single_mode_decay(self, grid):
        x1, x2 = grid.coords()
        u0 = Field(grid, np.cos(2.0 * x1 + x2)[None])
        sol = solve_heat(HeatProblem(u0, None, 0.1, 1e-3))
        expected = math.exp(-5.0 * 0.1) * u0.samples
        np.testing.assert_allclose(sol.snapshots[-1].samples, expected, atol=1e-13)

    def test_linear_in_time_forcing_is_exact(self, grid):
        # The exponential-trapezoid Duhamel term integrates forcing that is
        # linear in t without any quadrature error.
        x1, x2 = grid.coords()
        shape = np.cos(3.0 * x2)[None]
        u0 = Field(grid, 0.2 * shape)
        lam = 9.0
        T, dt = 0.2, 2e-3

        def forcing(t):
            return Field(grid, (1.0 + 2.0 * t) * shape)

        sol = solve_heat(HeatProblem(u0, forcing, T, dt))
        decay = math.exp(-lam * T)
        coeff = (
            0.2 * decay
            + (1.0 + 2.0 * T) / lam
            - 2.0 / lam**2
            - decay * (1.0 / lam - 2.0 / lam**2)
        )
        np.testing.assert_allclose(sol.snapshots[-1].samples, coeff * shape, atol=1e-12)

    def test_self_convergence_order_two(self, grid):
        rng = sample_rng(20, 0)
        from lpmhd import build_filter_bank

        bank = build_filter_bank(grid)
        u0 = interior_field(grid, bank, rng)
        g_shape = interior_field(grid, bank, rng)

        def forcing(t):
            return Field(grid, math.sin(3.0 * t) * g_shape.samples)

        T = 0.1
        ref = solve_heat(HeatProblem(u0, forcing, T, T / 160.0))
        errs = []
        for n in (10, 20):
            sol = solve_heat(HeatProblem(u0, forcing, T, T / n))
            diff = sol.snapshots[-1] - ref.snapshots[-1]
            errs.append(lp_norm(diff, 2.0))
        order = math.log2(errs[0] / errs[1])
        assert order > 1.9

    def test_cadence_thins_snapshots(self, grid):
        u0 = Field(grid, np.ones((1,) + grid.shape))
        sol = solve_heat(HeatProblem(u0, None, 0.1, 1e-2, cadence=5))
        np.testing.assert_allclose(sol.times, [0.0, 0.05, 0.1])

    def test_spectral_initial_data(self, grid):
        rng = sample_rng(21, 0)
        from lpmhd import build_filter_bank

        u0 = interior_field(grid, build_filter_bank(grid), rng)
        a = solve_heat(HeatProblem(u0, None, 0.05, 1e-2))
        b = solve_heat(HeatProblem(to_spectral(u0), None, 0.05, 1e-2))
        np.testing.assert_allclose(
            a.snapshots[-1].samples, b.snapshots[-1].samples, atol=1e-14
        )

    def test_step_validation(self, grid):
        u0 = Field(grid, np.ones((1,) + grid.shape))
        with pytest.raises(ValueError, match="multiple"):
            HeatProblem(u0, None, 0.105, 1e-2)
        with pytest.raises(ValueError, match="T >= dt"):
            HeatProblem(u0, None, 1e-3, 1e-2)
        with pytest.raises(ValueError, match="dt must be positive"):
            HeatProblem(u0, None, 0.1, 0.0)
        with pytest.raises(ValueError, match="cadence"):
            HeatProblem(u0, None, 0.1, 1e-2, cadence=0)

    def test_short_forcing_series_rejected(self, grid):
        u0 = Field(grid, np.ones((1,) + grid.shape))
        g = TimeSeriesField(np.array([0.0, 0.05]), [u0, u0])
        with pytest.raises(ValueError, match="covers"):
            HeatProblem(u0, g, 0.1, 1e-2)

    def test_forcing_component_mismatch_rejected(self, grid):
        u0 = Field(grid, np.ones((1,) + grid.shape))

        def forcing(t):
            return Field(grid, np.ones((2,) + grid.shape))

        with pytest.raises(ValueError, match="components"):
            solve_heat(HeatProblem(u0, forcing, 0.1, 1e-2))

    def test_bad_initial_type_rejected(self, grid):
        with pytest.raises(TypeError, match="Field"):
            solve_heat(HeatProblem(np.ones(grid.shape), None, 0.1, 1e-2))


class TestHeatEstimate:
    def test_report_on_decaying_run(self, grid, bank):
        rng = sample_rng(22, 0)
        u0 = interior_field(grid, bank, rng)
        problem = HeatProblem(u0, None, 0.1, 2e-3)
        sol = solve_heat(problem)
        rep = heat_estimate_report(sol, problem, 1.0, 1.0, 0.0, 2.0, 1.0, bank)
        assert rep.variant == "heat"
        assert not rep.degenerate
        assert 0.0 < rep.ratio < 1.0
        assert rep.indices == {"s": 0.0, "p": 2.0, "r": 1.0, "q": 1.0, "q1": 1.0}

    def test_exponent_order_enforced(self, grid, bank):
        u0 = Field(grid, np.ones((1,) + grid.shape))
        problem = HeatProblem(u0, None, 0.1, 1e-2)
        sol = solve_heat(problem)
        with pytest.raises(ValueError, match="q1 <= q"):
            heat_estimate_report(sol, problem, 1.0, 2.0, 0.0, 2.0, 1.0, bank)

    def test_zero_data_degenerate(self, grid, bank):
        u0 = Field(grid, np.zeros((1,) + grid.shape))
        problem = HeatProblem(u0, None, 0.1, 1e-2)
        sol = solve_heat(problem)
        rep = heat_estimate_report(sol, problem, 1.0, 1.0, 0.0, 2.0, 1.0, bank)
        assert rep.degenerate
        assert rep.ratio == 0.0


class TestTransportSolver:
    def test_constant_velocity_translates(self, grid):
        x1, x2 = grid.coords()
        f0 = Field(grid, (np.sin(x1) * np.cos(2.0 * x2))[None])
        T, dt = 0.25, 2e-3
        vel = _steady_velocity(grid, np.stack([np.ones(grid.shape), -0.5 * np.ones(grid.shape)]), T)
        sol = solve_transport(TransportProblem(f0, vel, None, T, dt))
        shifted = np.sin(x1 - T) * np.cos(2.0 * (x2 + 0.5 * T))
        np.testing.assert_allclose(sol.snapshots[-1].samples[0], shifted, atol=1e-12)

    def test_l2_conserved_by_divergence_free_advection(self, grid):
        x1, x2 = grid.coords()
        vel = _steady_velocity(grid, np.stack([np.sin(x2), np.zeros(grid.shape)]), 0.5)
        f0 = Field(grid, np.cos(x1 + x2)[None])
        sol = solve_transport(TransportProblem(f0, vel, None, 0.5, 2e-3))
        norms = [lp_norm(s, 2.0) for s in sol.snapshots]
        assert abs(norms[-1] - norms[0]) <= 1e-10 * norms[0]

    def test_constant_source_with_zero_velocity(self, grid):
        x1, _ = grid.coords()
        f0 = Field(grid, np.sin(x1)[None])
        g = Field(grid, np.cos(x1)[None])
        T = 0.1
        vel = _steady_velocity(grid, np.zeros((2,) + grid.shape), T)
        src = TimeSeriesField(np.array([0.0, T]), [g, g])
        sol = solve_transport(TransportProblem(f0, vel, src, T, 2e-3))
        expected = f0.samples + T * g.samples
        np.testing.assert_allclose(sol.snapshots[-1].samples, expected, atol=1e-12)

    def test_cfl_violation_rejected(self, grid):
        f0 = Field(grid, np.ones((1,) + grid.shape))
        big = _steady_velocity(
            grid, np.stack([30.0 * np.ones(grid.shape), np.zeros(grid.shape)]), 0.1
        )
        with pytest.raises(ValueError, match="CFL violation"):
            TransportProblem(f0, big, None, 0.1, 2e-3)

    def test_compressible_velocity_rejected(self, grid):
        x1, _ = grid.coords()
        f0 = Field(grid, np.ones((1,) + grid.shape))
        bad = _steady_velocity(grid, np.stack([np.sin(x1), np.zeros(grid.shape)]), 0.1)
        with pytest.raises(ValueError, match="divergence-free"):
            TransportProblem(f0, bad, None, 0.1, 2e-3)

    def test_short_velocity_series_rejected(self, grid):
        f0 = Field(grid, np.ones((1,) + grid.shape))
        vel = _steady_velocity(grid, np.zeros((2,) + grid.shape), 0.05)
        with pytest.raises(ValueError, match="covers"):
            TransportProblem(f0, vel, None, 0.1, 2e-3)

    def test_scalar_velocity_rejected(self, grid):
        f0 = Field(grid, np.ones((1,) + grid.shape))
        vel = _steady_velocity(grid, np.zeros((1,) + grid.shape), 0.1)
        with pytest.raises(ValueError, match="vector"):
            TransportProblem(f0, vel, None, 0.1, 2e-3)


class TestTransportEstimate:
    def _shear_monitor(self, grid, bank, s=1.0, r=1.0):
        x1, x2 = grid.coords()
        T, dt = 0.25, 2e-3
        vel = _steady_velocity(grid, np.stack([np.sin(x2), np.zeros(grid.shape)]), T)
        f0 = Field(grid, np.cos(x1 + x2)[None])
        problem = TransportProblem(f0, vel, None, T, dt)
        sol = solve_transport(problem)
        return transport_estimate_report(sol, problem, s, 2.0, r, bank)

    def test_monitor_traces(self, grid, bank):
        mon = self._shear_monitor(grid, bank)
        assert mon.minimal_c >= 0.0
        assert np.all(np.diff(mon.V) >= 0.0)
        assert np.all(np.diff(mon.lhs) >= -1e-12)
        assert np.all(mon.lhs <= mon.rhs * (1.0 + 1e-10) + 1e-30)
        assert 0.0 < mon.minimal_c < 1.0
        ratios = mon.ratio_trace()
        assert ratios.shape == mon.times.shape
        assert np.all(ratios <= 1.0 + 1e-10)

    def test_report_shape(self, grid, bank):
        mon = self._shear_monitor(grid, bank)
        rep = mon.report()
        assert rep.variant == "transport"
        assert rep.ratio == mon.minimal_c
        assert not rep.degenerate
        assert rep.indices["d"] == 2

    def test_regularity_range_enforced(self, grid, bank):
        with pytest.raises(ValueError, match="admissible range"):
            self._shear_monitor(grid, bank, s=2.5)
        with pytest.raises(ValueError, match="admissible range"):
            self._shear_monitor(grid, bank, s=-2.5)
        with pytest.raises(ValueError, match="admissible range"):
            self._shear_monitor(grid, bank, s=2.0, r=2.0)

    def test_endpoint_regularity_with_r_one(self, grid, bank):
        mon = self._shear_monitor(grid, bank, s=2.0, r=1.0)
        assert mon.endpoint
        assert np.isfinite(mon.minimal_c)
