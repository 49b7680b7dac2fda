import math
from dataclasses import replace

import numpy as np
import pytest

from stationary_light import mbe
from stationary_light.mbe import (
    NumericalBlowupError,
    observables,
    reconstruct_optical_coherence,
    step_adiabatic,
    step_full,
    stored_gaussian_state,
    zero_state,
)
from stationary_light.params import Grid, PhysicalParams
from stationary_light.profiles import HomogeneousProfile, TanhRamp
from stationary_light.scenarios import ScenarioConfig

PARAMS = PhysicalParams()
EQUAL_BEAMS = HomogeneousProfile(1.0 / math.sqrt(2), 1.0 / math.sqrt(2))
BEAMS_OFF = HomogeneousProfile(0.0, 0.0)


def small_grid(n=301, half=15.0):
    return Grid(-half, half, n)


class TestStepFull:
    def test_zero_state_is_fixed_point(self):
        grid = small_grid()
        state = zero_state(grid)
        out = step_full(state, EQUAL_BEAMS, PARAMS, grid)
        assert all(np.array_equal(getattr(out, f), getattr(state, f))
                   for f in mbe.FIELD_NAMES)
        assert out.t == grid.dt

    def test_stored_excitation_stationary_without_controls(self):
        grid = small_grid()
        state = stored_gaussian_state(grid, width=3.0)
        out = state
        for _ in range(20):
            out = step_full(out, BEAMS_OFF, PARAMS, grid)
        assert np.array_equal(out.sigma_bc, state.sigma_bc)
        assert np.max(np.abs(out.e_plus)) == 0.0

    def test_linearity_in_stored_amplitude(self):
        grid = small_grid()
        alpha = 0.37 - 0.81j
        s1 = stored_gaussian_state(grid, width=3.0)
        s2 = stored_gaussian_state(grid, width=3.0, amplitude=alpha)
        for _ in range(60):
            s1 = step_full(s1, EQUAL_BEAMS, PARAMS, grid)
            s2 = step_full(s2, EQUAL_BEAMS, PARAMS, grid)
        for name in mbe.FIELD_NAMES:
            a = alpha * getattr(s1, name)
            b = getattr(s2, name)
            scale = np.max(np.abs(a)) + 1e-300
            assert np.max(np.abs(a - b)) / scale < 1e-10

    def test_requires_unit_cell_shift(self):
        grid = small_grid()
        state = zero_state(grid)
        with pytest.raises(ValueError, match="c\\*dt == dz"):
            step_full(state, EQUAL_BEAMS, PARAMS, grid, dt=grid.dt / 2)

    def test_blowup_diagnostic_names_field_and_position(self):
        grid = small_grid()
        state = stored_gaussian_state(grid, width=3.0)
        bad = state.sigma_bc.copy()
        bad[150] = np.nan
        state = replace(state, sigma_bc=bad)
        with pytest.raises(NumericalBlowupError) as err:
            step_full(state, EQUAL_BEAMS, PARAMS, grid)
        assert err.value.field in mbe.FIELD_NAMES
        assert math.isfinite(err.value.z)

    def test_grid_convergence_of_width(self):
        # halving dz and dt changes the tracked width by < 1%
        def run(n):
            grid = Grid(-60.0, 60.0, n)
            profile = HomogeneousProfile(
                1.0 / math.sqrt(2), 1.0 / math.sqrt(2), ramp=TanhRamp(10.0, 0.2)
            )
            state = stored_gaussian_state(grid, width=8.0)
            widths = {}
            n_steps = int(round(100.0 / grid.dt))
            for k in range(n_steps):
                state = step_full(state, profile, PARAMS, grid)
                t = state.t
                if abs(t - round(t / 25.0) * 25.0) < 0.5 * grid.dt and round(t / 25.0) > 0:
                    phi = np.full(grid.n_points, math.pi / 4)
                    widths[round(t / 25.0)] = observables(state, phi, grid).width_sq
            return widths

        coarse = run(601)
        fine = run(1201)
        for key, w_coarse in coarse.items():
            assert w_coarse == pytest.approx(fine[key], rel=0.01)


class TestStepAdiabatic:
    def test_pure_two_photon_rotation_without_controls(self):
        params = PhysicalParams(two_photon_detuning=0.3)
        grid = small_grid()
        state = stored_gaussian_state(grid, width=3.0)
        out = step_adiabatic(state, BEAMS_OFF, params, grid)
        expected = state.sigma_bc * np.exp(-1j * 0.3 * grid.dt)
        assert np.max(np.abs(out.sigma_bc - expected)) < 1e-10

    def test_reconstructed_coherence_on_resonance(self):
        grid = small_grid()
        z = grid.z
        e_plus = np.exp(-(z**2) / 9.0).astype(complex)
        e_minus = 0.5 * e_plus
        sigma_bc = -0.7 * e_plus
        a_plus = np.full(grid.n_points, 0.6 + 0j)
        a_minus = np.full(grid.n_points, 0.6 + 0j)
        p_plus, p_minus = reconstruct_optical_coherence(
            e_plus, e_minus, sigma_bc, a_plus, a_minus, PARAMS
        )
        gamma = PARAMS.gamma
        assert np.allclose(p_plus, 1j * (e_plus + 0.6 * sigma_bc) / gamma, atol=1e-15)
        assert np.allclose(p_minus, 1j * (e_minus + 0.6 * sigma_bc) / gamma, atol=1e-15)

    def test_tracks_full_solver_width(self):
        # width histories of the two steppers agree within 2% after the switch
        grid = Grid(-80.0, 80.0, 1201)
        profile = HomogeneousProfile(
            1.0 / math.sqrt(2), 1.0 / math.sqrt(2), ramp=TanhRamp(15.0, 0.15)
        )
        full = stored_gaussian_state(grid, width=10.0)
        adiab = stored_gaussian_state(grid, width=10.0)
        phi = np.full(grid.n_points, math.pi / 4)
        n_steps = int(round(160.0 / grid.dt))
        checks = 0
        for k in range(n_steps):
            full = step_full(full, profile, PARAMS, grid)
            adiab = step_adiabatic(adiab, profile, PARAMS, grid)
            if k % 100 == 99 and full.t > 40.0:
                w_full = observables(full, phi, grid).width_sq
                w_adiab = observables(adiab, phi, grid).width_sq
                assert w_adiab == pytest.approx(w_full, rel=0.02)
                checks += 1
        assert checks >= 5


class TestObservables:
    def test_symmetric_sum_mode_has_zero_first_moment(self):
        grid = small_grid()
        z = grid.z
        state = zero_state(grid)
        gauss = np.exp(-(z**2) / 4.0).astype(complex)
        state = replace(state, e_plus=gauss, e_minus=gauss.copy())
        phi = np.full(grid.n_points, math.pi / 4)
        obs = observables(state, phi, grid)
        assert obs.moments_defined
        assert obs.first_moment_sum == pytest.approx(0.0, abs=1e-12)
        assert obs.ratio == pytest.approx(1.0)

    def test_empty_fields_flag_moments_undefined(self):
        grid = small_grid()
        obs = observables(zero_state(grid), np.full(grid.n_points, math.pi / 4), grid)
        assert not obs.moments_defined
        assert math.isnan(obs.width_sq)
        assert obs.total_excitation == 0.0

    def test_total_excitation_counts_all_channels(self):
        grid = small_grid()
        z = grid.z
        gauss = np.exp(-(z**2) / 4.0).astype(complex)
        state = replace(zero_state(grid), e_plus=gauss, sigma_bc=gauss.copy())
        obs = observables(state, np.zeros(grid.n_points), grid)
        expected = 2.0 * np.sum(np.abs(gauss) ** 2) * grid.dz
        assert obs.total_excitation == pytest.approx(expected)


class TestStorageCycle:
    def test_full_storage_dark_interval_and_retrieval(self):
        # the schedule-driven cycle: a launched probe slows and maps onto the
        # spin, the fields vanish during the dark interval, and the
        # counter-propagating retrieval rebuilds matched fields that spread
        # diffusively
        from stationary_light import scenarios

        config = scenarios.load_config(scenarios.canned_scenario_path("fig2"))
        result = mbe.run(config)
        t = result.times
        z = config.grid.z
        dz = config.grid.dz

        def field_energy(state):
            return float(
                np.sum(np.abs(state.e_plus) ** 2 + np.abs(state.e_minus) ** 2) * dz
            )

        def at(target):
            return int(np.argmin(np.abs(t - target)))

        in_flight = field_energy(result.states[at(30.0)])
        dark = field_energy(result.states[at(150.0)])
        assert dark < 1e-5 * in_flight

        stored = result.states[at(150.0)]
        weight = np.abs(stored.sigma_bc) ** 2
        com = float(np.sum(z * weight) / np.sum(weight))
        assert 5.0 < com < 15.0  # launched at -55, slowed over ~65 length units

        retention = (result.observables[at(150.0)].total_excitation
                     / result.observables[at(0.0)].total_excitation)
        assert retention > 0.85

        for target in (400.0, 550.0, 700.0):
            assert abs(result.observables[at(target)].ratio - 1.0) < 0.02

        late = t >= 450.0
        widths = np.array([o.width_sq for o in result.observables])
        slope = np.polyfit(t[late], widths[late], 1)[0]
        assert slope == pytest.approx(1.0, rel=0.05)  # 2 D with v_gr = c/2


class TestRun:
    def test_zero_duration_returns_initial_snapshot(self):
        config = ScenarioConfig(
            name="tiny", description="", params=PARAMS, grid=small_grid(),
            profile=EQUAL_BEAMS, initial_width=3.0, duration=0.0,
        )
        result = mbe.run(config)
        assert len(result.states) == 1
        assert result.times[0] == 0.0
        init = config.build_initial_state()
        assert np.array_equal(result.states[0].sigma_bc, init.sigma_bc)

    def test_snapshot_cadence(self):
        config = ScenarioConfig(
            name="tiny", description="", params=PARAMS, grid=small_grid(),
            profile=EQUAL_BEAMS, initial_width=3.0, duration=5.0, snapshot_every=1.0,
        )
        result = mbe.run(config)
        assert len(result.states) >= 5
        assert result.times[-1] == pytest.approx(5.0, abs=2 * config.grid.dt)
