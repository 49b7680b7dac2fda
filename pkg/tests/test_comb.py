import math

import numpy as np
import pytest

from stationary_light import mbe
from stationary_light.comb import (
    adiabatic_offresonant,
    comb_bandwidth,
    comb_evolve,
    comb_state_from_spin,
    matched_field,
    photon_number,
    spin_diffusion_step,
    total_field,
)
from stationary_light.normal_modes import diffusion_evolve
from stationary_light.params import Grid, PhysicalParams
from stationary_light.profiles import CombProfile, CombTone, HomogeneousProfile, TanhRamp


def gaussian_spin(grid: Grid, width: float) -> np.ndarray:
    return np.exp(-(grid.z**2) / (2.0 * width**2)).astype(complex)


class TestResonantLimit:
    def test_single_resonant_tone_matches_full_solver(self):
        # one tone at zero detuning obeys the same equations as the resonant
        # two-beam system; integrators differ only at truncation order
        params = PhysicalParams()
        grid = Grid(-15.0, 15.0, 301)
        amp = 0.5
        profile_comb = CombProfile(tones=(CombTone(0.0, amp, amp),))
        profile_mbe = HomogeneousProfile(amp, amp)
        spin = gaussian_spin(grid, 3.0)
        comb_state = comb_state_from_spin(profile_comb, grid, spin)
        full_state = mbe.stored_gaussian_state(grid, 3.0)
        for _ in range(120):
            comb_state = comb_evolve(comb_state, profile_comb, params, grid)
            full_state = mbe.step_full(full_state, profile_mbe, params, grid)
        comp = comb_state.components[0]
        scale = np.max(np.abs(full_state.e_plus))
        assert np.max(np.abs(comp.e_plus - full_state.e_plus)) < 1e-6 * scale
        assert np.max(np.abs(comb_state.sigma_bc - full_state.sigma_bc)) < 1e-6

    def test_spin_frozen_without_drive(self):
        params = PhysicalParams()
        grid = Grid(-10.0, 10.0, 201)
        profile = CombProfile(tones=(CombTone(0.0, 0.0, 0.0),))
        spin = gaussian_spin(grid, 2.0)
        state = comb_state_from_spin(profile, grid, spin)
        for _ in range(25):
            state = comb_evolve(state, profile, params, grid)
        assert np.array_equal(state.sigma_bc, spin)


class TestAdiabaticOffresonant:
    def test_zero_spin_gives_zero_fields(self):
        tone = CombTone(5.0, 0.1, 0.1)
        e_plus, e_minus = adiabatic_offresonant(np.zeros(8), tone, PhysicalParams())
        assert np.all(e_plus == 0.0) and np.all(e_minus == 0.0)

    def test_sign_of_slaved_amplitude(self):
        tone = CombTone(5.0, 0.1, 0.1)
        spin = np.array([1.0 + 0j])
        e_plus, _ = adiabatic_offresonant(spin, tone, PhysicalParams())
        assert e_plus[0].real < 0.0
        assert e_plus[0] == pytest.approx(-0.1)


@pytest.fixture(scope="module")
def two_tone_run():
    """Two-tone comb (resonant + Delta = 20*gamma) evolved to the slaved regime.

    The spin envelope is wide against (Delta/gamma)*l_abs and the switch-on is
    slow against 1/Delta, so the slaving corrections and the switching
    transient both sit below the tolerances being tested.
    """
    params = PhysicalParams(gamma=0.02)
    grid = Grid(-180.0, 180.0, 3601)
    amp = 0.05
    delta1 = 20.0 * params.gamma
    profile = CombProfile(
        tones=(CombTone(0.0, amp, amp), CombTone(delta1, amp, amp)),
        ramp=TanhRamp(50.0, 0.03),
        gamma_ref=params.gamma,
    )
    spin = gaussian_spin(grid, 50.0)
    state = comb_state_from_spin(profile, grid, spin)
    n_steps = int(round(350.0 / grid.dt))
    for _ in range(n_steps):
        state = comb_evolve(state, profile, params, grid)
    return params, grid, profile, state


class TestSlavedComponents:
    def test_detuned_tone_follows_spin(self, two_tone_run):
        params, grid, profile, state = two_tone_run
        tone = profile.tones[1]
        comp = state.components[1]
        e_plus, e_minus = adiabatic_offresonant(
            state.sigma_bc, tone, params, ramp_factor=profile.ramp_factor(state.t)
        )
        core = np.abs(state.sigma_bc) > 0.1 * np.max(np.abs(state.sigma_bc))
        for measured, slaved in ((comp.e_plus, e_plus), (comp.e_minus, e_minus)):
            rel = np.abs(measured[core] - slaved[core]) / np.abs(slaved[core])
            assert np.max(rel) < 0.03

    def test_total_field_matches_prediction(self, two_tone_run):
        params, grid, profile, state = two_tone_run
        core = np.abs(state.sigma_bc) > 0.1 * np.max(np.abs(state.sigma_bc))
        total = total_field(state, params, grid.z)
        predicted = matched_field(state.sigma_bc, profile, params, grid.z, state.t)
        rel = np.abs(total[core] - predicted[core]) / np.abs(predicted[core])
        assert np.max(rel) < 0.05


class TestMatchedField:
    def test_zero_spin(self):
        profile = CombProfile(tones=(CombTone(0.0, 0.1, 0.1),))
        out = matched_field(np.zeros(16), profile, PhysicalParams(), np.linspace(-1, 1, 16), 0.0)
        assert np.all(out == 0.0)

    def test_single_pair_is_flat_envelope(self):
        profile = CombProfile(tones=(CombTone(0.0, 0.1, 0.1),))
        z = np.linspace(-10, 10, 101)
        spin = np.exp(-(z**2) / 8.0).astype(complex)
        out = matched_field(spin, profile, PhysicalParams(), z, 3.7)
        assert np.allclose(out, -0.2 * spin, rtol=1e-12)

    def test_constructive_peak_scales_with_tone_count(self):
        # equal-amplitude tones: peak-to-background ratio grows with the count
        params = PhysicalParams()
        z = np.linspace(-60.0, 60.0, 4001)
        spin = np.ones_like(z, dtype=complex)
        ratios = []
        for n_side in (1, 2, 4):
            tones = tuple(
                CombTone(0.5 * k, 0.02, 0.02) for k in range(-n_side, n_side + 1)
            )
            profile = CombProfile(tones=tones)
            env = np.abs(matched_field(spin, profile, params, z, 0.0))
            background = np.mean(env)
            ratios.append(env.max() / background)
        assert ratios[0] < ratios[1] < ratios[2]

    def test_against_direct_series_summation(self):
        # independent literal summation of the comb series
        params = PhysicalParams(light_speed=1.0)
        tones = tuple(CombTone(0.4 * k, 0.03, 0.03) for k in (-2, -1, 0, 1, 2))
        profile = CombProfile(tones=tones)
        z = np.linspace(-25, 25, 501)
        spin = np.exp(-(z**2) / 60.0).astype(complex)
        t = 1.3
        direct = np.zeros_like(spin)
        for k in (-2, -1, 0, 1, 2):
            delta = 0.4 * k
            direct += 0.03 * np.exp(-1j * delta * (t - z)) * spin
            direct += 0.03 * np.exp(-1j * delta * (t + z)) * spin
        direct *= -1.0
        out = matched_field(spin, profile, params, z, t)
        assert np.max(np.abs(out - direct)) < 1e-12


class TestBandwidth:
    def test_unit_depth(self):
        params = PhysicalParams()
        assert comb_bandwidth(params, params.absorption_length) == pytest.approx(params.gamma)

    def test_scaling(self):
        params = PhysicalParams(gamma=1.0)
        assert comb_bandwidth(params, 100.0) == pytest.approx(100.0)

    def test_component_beyond_bandwidth_violates_matching(self):
        # a tone detuned to 5x the bandwidth limit cannot follow the spin
        params = PhysicalParams(gamma=1.0)
        grid = Grid(-60.0, 60.0, 1201)
        width = 10.0
        delta_max = comb_bandwidth(params, width)
        delta_k = 5.0 * delta_max
        amp = 0.05
        profile = CombProfile(
            tones=(CombTone(0.0, amp, amp), CombTone(delta_k, amp, amp)),
            ramp=TanhRamp(5.0, 0.3),
        )
        spin = gaussian_spin(grid, width)
        state = comb_state_from_spin(profile, grid, spin)
        for _ in range(int(round(40.0 / grid.dt))):
            state = comb_evolve(state, profile, params, grid)
        comp = state.components[1]
        slaved_plus, _ = adiabatic_offresonant(
            state.sigma_bc, profile.tones[1], params, profile.ramp_factor(state.t)
        )
        core = np.abs(state.sigma_bc) > 0.1 * np.max(np.abs(state.sigma_bc))
        rel = np.abs(comp.e_plus[core] - slaved_plus[core]) / np.abs(slaved_plus[core])
        assert np.max(rel) > 0.20


class TestFilteringBudget:
    def test_comb_carries_fewer_photons_at_matched_center(self):
        # five tones normalized so the constructive center amplitude equals
        # the single-pair amplitude: same central excitation density, but
        # strictly fewer probe photons (the narrowing is a filter)
        params = PhysicalParams(gamma=0.02)
        grid = Grid(-70.0, 70.0, 1401)
        amp = 0.05
        tones_comb = tuple(
            CombTone(0.4 * k, amp / 5.0, amp / 5.0) for k in (-2, -1, 0, 1, 2)
        )
        comb_profile = CombProfile(tones=tones_comb, ramp=TanhRamp(10.0, 0.1),
                                   gamma_ref=params.gamma)
        pair_profile = CombProfile(tones=(CombTone(0.0, amp, amp),),
                                   ramp=TanhRamp(10.0, 0.1))
        spin = gaussian_spin(grid, 20.0)
        states = {}
        for tag, profile in (("comb", comb_profile), ("pair", pair_profile)):
            state = comb_state_from_spin(profile, grid, spin)
            for _ in range(int(round(150.0 / grid.dt))):
                state = comb_evolve(state, profile, params, grid)
            states[tag] = state

        n_comb = photon_number(states["comb"], grid)
        n_pair = photon_number(states["pair"], grid)
        assert n_comb < n_pair
        assert n_comb == pytest.approx(n_pair / 5.0, rel=0.1)

        i0 = grid.n_points // 2
        def center_density(state):
            dens = np.abs(state.sigma_bc[i0]) ** 2
            for comp in state.components:
                dens += np.abs(comp.e_plus[i0]) ** 2 + np.abs(comp.e_minus[i0]) ** 2
            return dens

        assert center_density(states["comb"]) == pytest.approx(
            center_density(states["pair"]), rel=0.05
        )


class TestSpinDiffusionStep:
    def test_flat_core_unchanged(self):
        # zero curvature: a wide plateau does not move (the operator needs
        # fields that have decayed at the window ends)
        z = np.linspace(-40, 40, 801)
        dz = z[1] - z[0]
        spin = (0.5 * (np.tanh((z + 25) / 2) - np.tanh((z - 25) / 2))).astype(complex)
        out = spin_diffusion_step(spin, 0.5, dz**2 / (2 * 0.5) * 0.9, dz)
        core = np.abs(z) < 10
        assert np.allclose(out[core], spin[core], atol=1e-12)

    def test_equals_sum_mode_diffusion_operator(self):
        z = np.linspace(-30, 30, 601)
        dz = z[1] - z[0]
        spin = np.exp(-(z**2) / 12.0).astype(complex)
        dt = dz**2 / (2 * 0.5) * 0.9
        a = spin_diffusion_step(spin, 0.5, dt, dz)
        b = diffusion_evolve(spin, dz, 0.5, dt)
        assert np.max(np.abs(a - b)) < 1e-10

    def test_stability_bound_enforced(self):
        with pytest.raises(ValueError, match="unstable"):
            spin_diffusion_step(np.ones(8, dtype=complex), 1.0, 1.0, 0.1)
