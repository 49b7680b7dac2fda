"""Frequency-comb retrieval: component-resolved evolution and matched fields.

Each comb tone k evolves its own probe envelopes E_{pm k} and optical
coherences in a frame already rotating at exp(-i Delta_k (t -/+ z/c)); only
the spin coherence is shared.  The detuned tones make the local equations
stiff through the diagonal -(gamma + i Delta_k), so the local substep uses a
Lawson (integrating-factor) RK4 that treats that diagonal exactly while the
advection remains an exact one-cell shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mbe import NumericalBlowupError
from .normal_modes import diffusion_evolve
from .params import Grid, PhysicalParams
from .profiles import CombProfile, CombTone

__all__ = [
    "CombComponent",
    "CombState",
    "comb_state_from_spin",
    "comb_evolve",
    "adiabatic_offresonant",
    "matched_field",
    "comb_bandwidth",
    "spin_diffusion_step",
    "total_field",
    "photon_number",
]


@dataclass(frozen=True)
class CombComponent:
    """Field and coherence envelopes of one comb tone."""

    detuning: float
    e_plus: np.ndarray
    e_minus: np.ndarray
    sigma_ba_plus: np.ndarray
    sigma_ba_minus: np.ndarray


@dataclass(frozen=True)
class CombState:
    """All component envelopes plus the shared spin coherence."""

    t: float
    components: tuple[CombComponent, ...]
    sigma_bc: np.ndarray


def comb_state_from_spin(profile: CombProfile, grid: Grid, sigma_bc: np.ndarray) -> CombState:
    """Dark initial state: stored spin, all probe components empty."""
    n = grid.n_points
    comps = tuple(
        CombComponent(
            detuning=tone.detuning,
            e_plus=np.zeros(n, dtype=complex),
            e_minus=np.zeros(n, dtype=complex),
            sigma_ba_plus=np.zeros(n, dtype=complex),
            sigma_ba_minus=np.zeros(n, dtype=complex),
        )
        for tone in profile.tones
    )
    return CombState(t=0.0, components=comps, sigma_bc=np.asarray(sigma_bc, dtype=complex).copy())


def _pack(state: CombState) -> tuple[np.ndarray, np.ndarray]:
    comp = np.stack(
        [
            np.stack([c.e_plus, c.e_minus, c.sigma_ba_plus, c.sigma_ba_minus])
            for c in state.components
        ]
    )
    return comp, state.sigma_bc.copy()


def comb_evolve(
    state: CombState,
    profile: CombProfile,
    params: PhysicalParams,
    grid: Grid,
    dt: float | None = None,
) -> CombState:
    """One Strang step (local Lawson-RK4, exact shift, local Lawson-RK4)."""
    dt = grid.dt if dt is None else dt
    if abs(params.light_speed * dt - grid.dz) > 1e-9 * grid.dz:
        raise ValueError("the advection shift requires c*dt == dz")
    if len(state.components) != len(profile.tones):
        raise ValueError("state and profile carry different numbers of tones")
    for comp, tone in zip(state.components, profile.tones):
        if comp.detuning != tone.detuning:
            raise ValueError("component/tone detunings disagree")

    gp = params.coupling
    detunings = np.array([tone.detuning for tone in profile.tones], dtype=float)
    amp_plus = np.array([tone.omega_plus for tone in profile.tones], dtype=complex)
    amp_minus = np.array([tone.omega_minus for tone in profile.tones], dtype=complex)
    # diagonal rates: rows (E+, E-, P+, P-) per tone, plus the shared spin
    lam_p = -(params.gamma + 1j * detunings)  # (n_k,)
    lam_s = -params.gamma0

    def local_half(comp: np.ndarray, spin: np.ndarray, t0: float, h: float):
        def n_of(comp_u: np.ndarray, spin_u: np.ndarray, t: float):
            r = profile.ramp_factor(t)
            op = (r * amp_plus)[:, None]
            om = (r * amp_minus)[:, None]
            out_c = np.empty_like(comp_u)
            out_c[:, 0] = 1j * gp * comp_u[:, 2]
            out_c[:, 1] = 1j * gp * comp_u[:, 3]
            out_c[:, 2] = 1j * gp * comp_u[:, 0] + 1j * op * spin_u
            out_c[:, 3] = 1j * gp * comp_u[:, 1] + 1j * om * spin_u
            out_s = 1j * np.sum(
                np.conj(op) * comp_u[:, 2] + np.conj(om) * comp_u[:, 3], axis=0
            )
            return out_c, out_s

        def stage(v_c, v_s, tau, t):
            # u = exp(lam*tau) v on the stiff rows, then back-transform N
            fac_p = np.exp(lam_p * tau)[:, None]
            fac_s = np.exp(lam_s * tau)
            u_c = v_c.copy()
            u_c[:, 2] *= fac_p
            u_c[:, 3] *= fac_p
            u_s = v_s * fac_s
            n_c, n_s = n_of(u_c, u_s, t)
            n_c[:, 2] /= fac_p
            n_c[:, 3] /= fac_p
            n_s = n_s / fac_s
            return n_c, n_s

        v_c, v_s = comp, spin
        k1c, k1s = stage(v_c, v_s, 0.0, t0)
        k2c, k2s = stage(v_c + 0.5 * h * k1c, v_s + 0.5 * h * k1s, 0.5 * h, t0 + 0.5 * h)
        k3c, k3s = stage(v_c + 0.5 * h * k2c, v_s + 0.5 * h * k2s, 0.5 * h, t0 + 0.5 * h)
        k4c, k4s = stage(v_c + h * k3c, v_s + h * k3s, h, t0 + h)
        v_c = v_c + (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        v_s = v_s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        # leave the transformed frame
        fac_p = np.exp(lam_p * h)[:, None]
        v_c[:, 2] *= fac_p
        v_c[:, 3] *= fac_p
        v_s = v_s * np.exp(lam_s * h)
        return v_c, v_s

    comp, spin = _pack(state)
    with np.errstate(invalid="ignore", over="ignore"):
        comp, spin = local_half(comp, spin, state.t, 0.5 * dt)
        comp[:, 0, 1:] = comp[:, 0, :-1]
        comp[:, 0, 0] = 0.0
        comp[:, 1, :-1] = comp[:, 1, 1:]
        comp[:, 1, -1] = 0.0
        comp, spin = local_half(comp, spin, state.t + 0.5 * dt, 0.5 * dt)

    t_new = state.t + dt
    if not (np.isfinite(comp).all() and np.isfinite(spin).all()):
        if not np.isfinite(spin).all():
            idx = int(np.argmax(~np.isfinite(spin)))
            raise NumericalBlowupError("sigma_bc", idx, grid.z[idx], t_new)
        k, row, idx = np.argwhere(~np.isfinite(comp))[0]
        names = ("e_plus", "e_minus", "sigma_ba_plus", "sigma_ba_minus")
        raise NumericalBlowupError(
            f"{names[row]}[tone {k}]", int(idx), grid.z[int(idx)], t_new
        )

    comps = tuple(
        CombComponent(
            detuning=float(detunings[k]),
            e_plus=comp[k, 0],
            e_minus=comp[k, 1],
            sigma_ba_plus=comp[k, 2],
            sigma_ba_minus=comp[k, 3],
        )
        for k in range(len(detunings))
    )
    return CombState(t=t_new, components=comps, sigma_bc=spin)


def adiabatic_offresonant(
    sigma_bc: np.ndarray,
    tone: CombTone,
    params: PhysicalParams,
    ramp_factor: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Envelopes of a far-detuned tone slaved to the spin: E = -(Omega/g_p) S."""
    sigma_bc = np.asarray(sigma_bc, dtype=complex)
    gp = params.coupling
    return (
        -(tone.omega_plus * ramp_factor / gp) * sigma_bc,
        -(tone.omega_minus * ramp_factor / gp) * sigma_bc,
    )


def matched_field(
    sigma_bc: np.ndarray,
    profile: CombProfile,
    params: PhysicalParams,
    z: np.ndarray,
    t: float,
) -> np.ndarray:
    """Long-time total probe envelope E(z, t) = -Omega(z, t) sigma_bc / g_p."""
    sigma_bc = np.asarray(sigma_bc, dtype=complex)
    return -profile.envelope(z, t, params) * sigma_bc / params.coupling


def comb_bandwidth(params: PhysicalParams, length: float) -> float:
    """Largest usable comb detuning, gamma times the optical depth."""
    if length <= 0.0:
        raise ValueError("length must be positive")
    return params.gamma * params.optical_depth(length)


def spin_diffusion_step(
    sigma_bc: np.ndarray, diffusivity: float, dt: float, dz: float
) -> np.ndarray:
    """One diffusion step of the slaved spin coherence.

    Enforces the explicit-step contract dt <= dz^2/(2 D) and applies the same
    exact heat-kernel operator used for the sum mode.
    """
    if diffusivity > 0.0 and dt > dz**2 / (2.0 * diffusivity):
        raise ValueError(
            f"diffusion step unstable: dt={dt:.3g} exceeds dz^2/(2D)={dz**2 / (2 * diffusivity):.3g}"
        )
    return diffusion_evolve(sigma_bc, dz, diffusivity, dt)


def total_field(
    state: CombState,
    params: PhysicalParams,
    z: np.ndarray,
    t: float | None = None,
) -> np.ndarray:
    """Reattach the comb phases and sum all component envelopes."""
    t = state.t if t is None else t
    z = np.asarray(z, dtype=float)
    c = params.light_speed
    out = np.zeros(z.shape, dtype=complex)
    for comp in state.components:
        out += comp.e_plus * np.exp(-1j * comp.detuning * (t - z / c))
        out += comp.e_minus * np.exp(-1j * comp.detuning * (t + z / c))
    return out


def photon_number(state: CombState, grid: Grid) -> float:
    """Sum over components of the probe photon number integral."""
    total = 0.0
    for comp in state.components:
        total += float(
            np.sum(np.abs(comp.e_plus) ** 2 + np.abs(comp.e_minus) ** 2) * grid.dz
        )
    return total
