"""Tests for the coupled iteration, its monitors, and the uniqueness gauge."""

import math

import numpy as np
import pytest

from lpmhd import (
    Field,
    IterationConfig,
    MhdInitialData,
    TimeSeriesField,
    check_uniform_bounds,
    divergence,
    init_iterate,
    iterate_once,
    lp_norm,
    mean_mode,
    osgood_check,
    perturb_initial_data,
    perturbation_sweep,
    prepare_initial_data,
    run_iteration,
    select_time_horizon,
    system_residual,
    taylor_green_data,
    truncate_initial_data,
    twin_run_uniqueness,
)
from lpmhd.mhd import compute_e0


def _small_config(**kw):
    base = dict(max_iterations=3, tolerance=0.0, t_max=0.02)
    base.update(kw)
    return IterationConfig(**base)


class TestIterationConfig:
    def test_defaults_valid(self):
        cfg = IterationConfig()
        assert cfg.grid().N == 64
        assert cfg.bank().grid == cfg.grid()

    def test_p_range_message_names_dimension(self):
        with pytest.raises(ValueError, match=r"p must lie in \[1, 2\*d\] = \[1, 4\]"):
            IterationConfig(p=5.0)
        with pytest.raises(ValueError, match=r"\[1, 6\]"):
            IterationConfig(d=3, N=8, p=7.0)

    @pytest.mark.parametrize(
        "kw, msg",
        [
            (dict(eta=1.0), "eta"),
            (dict(c0=1.0), "C0"),
            (dict(dt=0.0), "dt"),
            (dict(t_max=1e-4), "T_max"),
            (dict(cadence=0), "cadence"),
            (dict(max_iterations=-1), "max_iterations"),
            (dict(tolerance=-1.0), "tolerance"),
        ],
    )
    def test_knob_validation(self, kw, msg):
        with pytest.raises(ValueError, match=msg):
            IterationConfig(**kw)

    def test_band_override_reaches_bank(self):
        cfg = IterationConfig(j_min=-1, j_max=2)
        bank = cfg.bank()
        assert bank.j_min == -1 and bank.j_max == 2


class TestInitialData:
    def test_cellular_data_structure(self, grid):
        data = taylor_green_data(grid)
        x1, x2 = grid.coords()
        np.testing.assert_allclose(
            data.u0.samples[0], 0.05 * np.sin(x1) * np.cos(x2), atol=1e-15
        )
        np.testing.assert_allclose(
            data.b0.samples[0], 0.05 * np.cos(x1) * np.sin(x2), atol=1e-15
        )

    def test_cellular_data_amplitude(self, grid):
        data = taylor_green_data(grid, amplitude=1.0)
        assert abs(np.max(data.u0.samples) - 1.0) < 1e-12

    def test_cellular_data_needs_d2(self):
        from lpmhd import make_grid

        with pytest.raises(ValueError, match="two-dimensional"):
            taylor_green_data(make_grid(3, 8, 2.0 * math.pi))

    def test_compressible_field_rejected(self, grid):
        x1, _ = grid.coords()
        bad = Field(grid, np.stack([np.sin(x1), np.zeros(grid.shape)]))
        good = taylor_green_data(grid).u0
        with pytest.raises(ValueError, match="divergence-free"):
            MhdInitialData(bad, good)

    def test_mean_mode_rejected(self, grid):
        good = taylor_green_data(grid)
        shifted = Field(grid, good.u0.samples + 0.5)
        with pytest.raises(ValueError, match="mean mode"):
            MhdInitialData(shifted, good.b0)

    def test_prepare_projects_and_demeans(self, grid):
        x1, x2 = grid.coords()
        raw_u = Field(grid, np.stack([np.sin(x1) + 0.3, np.cos(x1) + np.sin(x2)]))
        raw_b = Field(grid, np.stack([np.cos(x2), np.sin(x1) * np.cos(x2)]))
        data = prepare_initial_data(raw_u, raw_b)
        assert lp_norm(divergence(data.u0), 2.0) <= 1e-11
        np.testing.assert_allclose(mean_mode(data.u0), 0.0, atol=1e-15)
        np.testing.assert_allclose(mean_mode(data.b0), 0.0, atol=1e-15)


class TestPerturbation:
    def test_zero_size_is_bit_identical(self, grid, bank):
        data = taylor_green_data(grid)
        pert = perturb_initial_data(data, 0.0, seed=5, bank=bank)
        assert np.array_equal(pert.u0.samples, data.u0.samples)
        assert np.array_equal(pert.b0.samples, data.b0.samples)

    def test_size_sets_l2_distance(self, grid, bank):
        data = taylor_green_data(grid)
        size = 3e-3
        pert = perturb_initial_data(data, size, seed=5, bank=bank)
        du = Field(grid, pert.u0.samples - data.u0.samples)
        db = Field(grid, pert.b0.samples - data.b0.samples)
        np.testing.assert_allclose(lp_norm(du, 2.0), size, rtol=1e-12)
        np.testing.assert_allclose(lp_norm(db, 2.0), size, rtol=1e-12)

    def test_perturbed_data_stays_admissible(self, grid, bank):
        data = taylor_green_data(grid)
        pert = perturb_initial_data(data, 1e-2, seed=6, bank=bank)
        assert lp_norm(divergence(pert.u0), 2.0) <= 1e-10

    def test_reproducible(self, grid, bank):
        data = taylor_green_data(grid)
        a = perturb_initial_data(data, 1e-3, seed=7, bank=bank)
        b = perturb_initial_data(data, 1e-3, seed=7, bank=bank)
        assert np.array_equal(a.u0.samples, b.u0.samples)

    def test_negative_size_rejected(self, grid, bank):
        data = taylor_green_data(grid)
        with pytest.raises(ValueError, match=">= 0"):
            perturb_initial_data(data, -1e-3, seed=5, bank=bank)


class TestTruncation:
    def test_top_level_is_identity_on_low_modes(self, grid, bank):
        data = taylor_green_data(grid)
        out = truncate_initial_data(data, bank.j_max + 1, bank)
        np.testing.assert_allclose(out.u0.samples, data.u0.samples, atol=1e-14)

    def test_low_level_shrinks_norm(self, grid, bank):
        from lpmhd import interior_field, sample_rng

        rng = sample_rng(30, 0)
        u = interior_field(grid, bank, rng, components=2)
        from lpmhd import leray_project, to_physical, to_spectral

        u = to_physical(leray_project(to_spectral(u)))
        data = prepare_initial_data(u, u)
        out = truncate_initial_data(data, bank.j_min, bank)
        assert lp_norm(out.u0, 2.0) < 0.5 * lp_norm(data.u0, 2.0)

    def test_out_of_band_level_rejected(self, grid, bank):
        data = taylor_green_data(grid)
        with pytest.raises(ValueError, match="outside the dyadic band"):
            truncate_initial_data(data, bank.j_max + 2, bank)
        with pytest.raises(ValueError, match="outside the dyadic band"):
            truncate_initial_data(data, bank.j_min - 1, bank)


class TestHorizon:
    def test_cellular_horizon_value(self, grid, bank):
        data = taylor_green_data(grid)
        h = select_time_horizon(data.u0, 0.1, 2e-3, 0.5, 2.0, bank)
        assert h.condition_met
        np.testing.assert_allclose(h.T, 0.058, atol=1e-12)
        assert h.lhs <= h.threshold

    def test_zero_data_reaches_t_max(self, grid, bank):
        u0 = Field(grid, np.zeros((2,) + grid.shape))
        h = select_time_horizon(u0, 0.1, 2e-3, 0.5, 2.0, bank)
        assert h.condition_met
        assert h.T == 0.5
        assert h.lhs == 0.0

    def test_large_data_flagged_at_one_step(self, grid, bank):
        data = taylor_green_data(grid, amplitude=50.0)
        h = select_time_horizon(data.u0, 0.1, 2e-3, 0.5, 2.0, bank)
        assert not h.condition_met
        assert h.T == 2e-3

    def test_eta_validated(self, grid, bank):
        data = taylor_green_data(grid)
        with pytest.raises(ValueError, match="eta"):
            select_time_horizon(data.u0, 1.5, 2e-3, 0.5, 2.0, bank)

    def test_threshold_monotone_in_eta(self, grid, bank):
        data = taylor_green_data(grid)
        t_small = select_time_horizon(data.u0, 0.05, 2e-3, 0.5, 2.0, bank).T
        t_large = select_time_horizon(data.u0, 0.2, 2e-3, 0.5, 2.0, bank).T
        assert t_small <= t_large


class TestIterationScheme:
    def test_initial_energy_closed_form(self, grid, bank):
        # Both fields carry a single |k| = sqrt(2) pair in shell 0, so each
        # shell norm collapses to the plain L2 norm A/sqrt(2).
        data = taylor_green_data(grid)
        e0 = compute_e0(data, 2.0, bank)
        np.testing.assert_allclose(e0, 0.05 * math.sqrt(2.0), rtol=1e-13)

    def test_first_iterate_is_free_evolution(self, grid):
        cfg = _small_config()
        data = taylor_green_data(grid)
        state = init_iterate(data, cfg, 0.02)
        assert state.n == 0
        assert state.prev_u is None
        trunc = truncate_initial_data(data, max(0, state.bank.j_min), state.bank)
        hat = grid.fft(trunc.u0.samples)
        expected = grid.ifft(hat * np.exp(-grid.k_sq * 0.02)).real
        np.testing.assert_allclose(
            state.u_series.snapshots[-1].samples, expected, atol=1e-13
        )

    def test_iterate_advances_and_links(self, grid):
        cfg = _small_config()
        data = taylor_green_data(grid)
        s0 = init_iterate(data, cfg, 0.02)
        s1 = iterate_once(s0, cfg)
        assert s1.n == 1
        assert s1.prev_u is s0.u_series
        assert s1.T == s0.T

    def test_run_records_and_difference_decay(self, grid):
        diag = run_iteration(taylor_green_data(grid), _small_config())
        assert len(diag.records) == 4
        assert [r.n for r in diag.records] == [0, 1, 2, 3]
        assert math.isnan(diag.records[-1].d_n)
        d_vals = diag.difference_norms
        assert len(d_vals) == 3
        assert d_vals[1] < 0.01 * d_vals[0]
        assert d_vals[2] < 0.01 * d_vals[1]
        assert diag.decay_ratio < 0.5
        assert not diag.converged

    def test_tolerance_stops_early(self, grid):
        cfg = _small_config(max_iterations=8, tolerance=1e-6)
        diag = run_iteration(taylor_green_data(grid), cfg)
        assert diag.converged
        assert len(diag.records) < 9

    def test_override_horizon(self, grid):
        diag = run_iteration(taylor_green_data(grid), _small_config(), T_override=0.01)
        assert diag.T == 0.01
        assert diag.final_state.u_series.times[-1] == 0.01

    def test_uniform_bounds_hold(self, grid):
        cfg = _small_config()
        diag = run_iteration(taylor_green_data(grid), cfg)
        rep = check_uniform_bounds(diag.final_state, cfg)
        assert rep.h1_margin > 0.0
        assert rep.h2_margin > 0.0
        np.testing.assert_allclose(rep.h1_rhs, cfg.c0 * diag.e0, rtol=1e-13)
        assert rep.h2_rhs == cfg.eta

    def test_residual_probe(self, grid):
        diag = run_iteration(taylor_green_data(grid), _small_config())
        res = system_residual(diag.final_state.u_series, diag.final_state.b_series)
        assert res["u"].max() <= 1e-5
        assert res["b"].max() <= 1e-5
        times = diag.final_state.u_series.times
        snaps = list(diag.final_state.u_series.snapshots)
        mid = len(snaps) // 2
        snaps[mid] = Field(grid, 1.5 * snaps[mid].samples)
        broken = TimeSeriesField(times, snaps)
        res_bad = system_residual(broken, diag.final_state.b_series)
        assert res_bad["u"].max() > 10.0 * res["u"].max()


class TestOsgoodCheck:
    def test_zero_difference_passes(self):
        times = np.linspace(0.0, 1.0, 11)
        rho = np.zeros(11)
        out = osgood_check(times, rho, a_t=1.0, c_t=1.0, offset=1e-6)
        assert out.passed
        np.testing.assert_allclose(out.margins, 1e-6)

    def test_fast_growth_fails(self):
        times = np.linspace(0.0, 1.0, 11)
        rho = np.linspace(0.0, 10.0, 11)
        out = osgood_check(times, rho, a_t=0.0, c_t=1.0, offset=1e-3)
        assert not out.passed
        assert out.worst_margin < -9.0

    def test_negative_rho_rejected(self):
        times = np.linspace(0.0, 1.0, 3)
        with pytest.raises(ValueError, match="nonnegative"):
            osgood_check(times, np.array([0.0, -1.0, 0.0]), 1.0, 1.0, 0.0)


class TestUniquenessGauge:
    def test_zero_perturbation_twin_is_identical(self, grid):
        cfg = _small_config()
        rep = twin_run_uniqueness(taylor_green_data(grid), cfg, 0.0)
        assert np.all(rep.rho == 0.0)
        assert np.all(rep.delta_b_trace == 0.0)
        assert rep.c_emp == 1.0
        assert rep.osgood_passed

    def test_sweep_slope_near_linear(self, grid):
        cfg = _small_config()
        sweep = perturbation_sweep(taylor_green_data(grid), cfg, [1e-4, 1e-3])
        assert all(r.osgood_passed for r in sweep.reports)
        assert 0.8 < sweep.slope < 1.2
        assert sweep.rho_final[1] > sweep.rho_final[0]

    def test_degenerate_sweep_slope_is_nan(self, grid):
        cfg = _small_config(max_iterations=2)
        sweep = perturbation_sweep(taylor_green_data(grid), cfg, [0.0])
        assert math.isnan(sweep.slope)
        assert sweep.rho_final[0] == 0.0
