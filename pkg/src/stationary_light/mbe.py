"""Secular Maxwell-Bloch solver for counter-propagating weak probe fields.

Normalization: the optical and spin coherences are evolved as the
sqrt(N)-scaled envelopes P_pm = sqrt(N)*sigma_ba^(pm) and
S = sqrt(N)*sigma_bc, so every coupling in the equations of motion is the
collective rate g_p = g*sqrt(N):

    dP_pm/dt = -(i(delta + Delta) + gamma) P_pm + i g_p E_pm + i Omega_pm0 S
    dS/dt    = -(i delta + gamma0) S + i Omega_+0* P_+ + i Omega_-0* P_-
    (d/dt pm c d/dz) E_pm = -i Delta_omega E_pm + i g_p P_pm

Any residual constant in the field normalization only rescales E and drops
out of every reported ratio (the equations are linear in the probe sector).

Time stepping is Strang splitting: a fourth-order explicit (RK4) update of
the local atomic/source terms for dt/2, an exact one-cell shift for the
advection (c*dt = dz is required, which removes numerical dispersion), and
a second local half step.  Boundaries are open: zero inflow, outflow
discarded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from .params import Grid, PhysicalParams
from .profiles import ControlProfile, control_field_at, phi_field_at

if TYPE_CHECKING:  # pragma: no cover
    from .scenarios import ScenarioConfig

__all__ = [
    "SystemState",
    "Observables",
    "SimulationResult",
    "NumericalBlowupError",
    "AdiabaticityWarning",
    "stored_gaussian_state",
    "probe_gaussian_state",
    "zero_state",
    "step_full",
    "step_adiabatic",
    "run",
    "observables",
    "local_rate_bound",
]

RK4_REAL_STABILITY = 2.6
FIELD_NAMES = ("e_plus", "e_minus", "sigma_ba_plus", "sigma_ba_minus", "sigma_bc")


class NumericalBlowupError(RuntimeError):
    """A field array left the finite range during time stepping."""

    def __init__(self, field: str, index: int, z: float, t: float):
        self.field = field
        self.index = index
        self.z = z
        self.t = t
        super().__init__(
            f"non-finite value in {field} at z={z:.6g} (cell {index}), t={t:.6g}"
        )


class AdiabaticityWarning(UserWarning):
    """The adiabatic stepper was driven faster than the optical decay."""


@dataclass(frozen=True)
class SystemState:
    """Probe fields and coherences on the grid at one instant.

    Arrays are complex, share the grid length, and are treated as immutable:
    stepping functions always return a fresh state.
    """

    t: float
    e_plus: np.ndarray
    e_minus: np.ndarray
    sigma_ba_plus: np.ndarray
    sigma_ba_minus: np.ndarray
    sigma_bc: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.e_plus)
        for name in FIELD_NAMES:
            if len(getattr(self, name)) != n:
                raise ValueError("state arrays must share one grid length")

    def fields(self) -> np.ndarray:
        return np.stack([getattr(self, name) for name in FIELD_NAMES])


@dataclass(frozen=True)
class Observables:
    """Integral diagnostics of one snapshot.

    ``width_sq`` and ``first_moment_sum`` are moments of the sum normal mode
    about the configured center; they are NaN (and ``moments_defined`` False)
    when the mode integral is too small to divide by.  ``ratio`` is
    E_+/E_- at the sum-mode maximum.
    """

    t: float
    width_sq: float
    first_moment_sum: float
    total_excitation: float
    peak_density: float
    ratio: complex
    moments_defined: bool = True


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    states: list[SystemState]
    observables: list[Observables]


def zero_state(grid: Grid, t: float = 0.0) -> SystemState:
    n = grid.n_points
    return SystemState(t, *(np.zeros(n, dtype=complex) for _ in FIELD_NAMES))


def stored_gaussian_state(
    grid: Grid, width: float, center: float = 0.0, amplitude: complex = 1.0
) -> SystemState:
    """Spin coherence stored as a Gaussian of the given rms width, fields dark."""
    if width <= 0.0:
        raise ValueError("width must be positive")
    z = grid.z
    state = zero_state(grid)
    sigma_bc = amplitude * np.exp(-((z - center) ** 2) / (2.0 * width**2))
    return replace(state, sigma_bc=sigma_bc.astype(complex))


def probe_gaussian_state(
    grid: Grid,
    width: float,
    center: float,
    amplitude: complex = 1.0,
    profile: ControlProfile | None = None,
    params: PhysicalParams | None = None,
) -> SystemState:
    """Forward probe Gaussian, optionally dressed with its dark-state spin.

    With ``profile`` and ``params`` given, sigma_bc is initialized to the
    adiabatic value -(g_p/Omega_0)*E_S at t=0 so that a pulse launched under
    strong control starts on the dark branch instead of ringing.
    """
    z = grid.z
    state = zero_state(grid)
    e_plus = amplitude * np.exp(-((z - center) ** 2) / (2.0 * width**2))
    sigma_bc = np.zeros_like(e_plus)
    if profile is not None and params is not None:
        a_plus, a_minus = control_field_at(profile, z, 0.0, params)
        omega0 = np.sqrt(np.abs(a_plus) ** 2 + np.abs(a_minus) ** 2)
        phi = np.arctan2(np.abs(a_minus), np.abs(a_plus))
        e_sum = np.cos(phi) * e_plus
        with np.errstate(divide="ignore", invalid="ignore"):
            sigma_bc = np.where(omega0 > 0.0, -(params.coupling / omega0) * e_sum, 0.0)
    return replace(state, e_plus=e_plus.astype(complex), sigma_bc=sigma_bc.astype(complex))


def _require_unit_shift(grid: Grid, params: PhysicalParams, dt: float) -> None:
    if abs(params.light_speed * dt - grid.dz) > 1e-9 * grid.dz:
        raise ValueError(
            f"the advection shift requires c*dt == dz (got c*dt={params.light_speed * dt:.9g}, "
            f"dz={grid.dz:.9g}); set Grid.dt = dz/c"
        )


def _check_finite(arrays: np.ndarray, grid: Grid, t: float) -> None:
    if np.isfinite(arrays).all():
        return
    for row, name in enumerate(FIELD_NAMES):
        bad = ~np.isfinite(arrays[row])
        if bad.any():
            idx = int(np.argmax(bad))
            raise NumericalBlowupError(name, idx, grid.z[idx], t)


def _shift_fields(f: np.ndarray) -> None:
    # exact advection by one cell: E_+ rightward, E_- leftward, zero inflow
    f[0, 1:] = f[0, :-1]
    f[0, 0] = 0.0
    f[1, :-1] = f[1, 1:]
    f[1, -1] = 0.0


def _rk4(f: np.ndarray, t: float, h: float, rhs: Callable[[np.ndarray, float], np.ndarray]) -> np.ndarray:
    k1 = rhs(f, t)
    k2 = rhs(f + 0.5 * h * k1, t + 0.5 * h)
    k3 = rhs(f + 0.5 * h * k2, t + 0.5 * h)
    k4 = rhs(f + h * k3, t + h)
    return f + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _full_rhs_factory(profile: ControlProfile, params: PhysicalParams, z: np.ndarray):
    gp = params.coupling
    gam_ba = 1j * (params.two_photon_detuning + params.one_photon_detuning) + params.gamma
    gam_bc = 1j * params.two_photon_detuning + params.gamma0
    i_dw = 1j * params.carrier_offset

    def rhs(f: np.ndarray, t: float) -> np.ndarray:
        a_plus, a_minus = control_field_at(profile, z, t, params)
        e_p, e_m, p_p, p_m, s = f
        out = np.empty_like(f)
        out[0] = -i_dw * e_p + 1j * gp * p_p
        out[1] = -i_dw * e_m + 1j * gp * p_m
        out[2] = -gam_ba * p_p + 1j * gp * e_p + 1j * a_plus * s
        out[3] = -gam_ba * p_m + 1j * gp * e_m + 1j * a_minus * s
        out[4] = -gam_bc * s + 1j * (np.conj(a_plus) * p_p + np.conj(a_minus) * p_m)
        return out

    return rhs


def _adiabatic_rhs_factory(profile: ControlProfile, params: PhysicalParams, z: np.ndarray):
    gp = params.coupling
    gam_eff = params.gamma + 1j * (params.one_photon_detuning + params.two_photon_detuning)
    gam_bc = 1j * params.two_photon_detuning + params.gamma0
    i_dw = 1j * params.carrier_offset

    def rhs(f: np.ndarray, t: float) -> np.ndarray:
        a_plus, a_minus = control_field_at(profile, z, t, params)
        e_p, e_m, s = f
        out = np.empty_like(f)
        out[0] = -i_dw * e_p - (gp**2 * e_p + gp * a_plus * s) / gam_eff
        out[1] = -i_dw * e_m - (gp**2 * e_m + gp * a_minus * s) / gam_eff
        out[2] = -gam_bc * s - (
            (np.abs(a_plus) ** 2 + np.abs(a_minus) ** 2) * s
            + gp * (np.conj(a_plus) * e_p + np.conj(a_minus) * e_m)
        ) / gam_eff
        return out

    return rhs


def reconstruct_optical_coherence(
    e_plus: np.ndarray,
    e_minus: np.ndarray,
    sigma_bc: np.ndarray,
    a_plus: np.ndarray,
    a_minus: np.ndarray,
    params: PhysicalParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Optical coherences slaved to fields and spin: P = i(g_p E + Omega S)/Gamma."""
    gam_eff = params.gamma + 1j * (params.one_photon_detuning + params.two_photon_detuning)
    gp = params.coupling
    p_plus = (1j * gp * e_plus + 1j * a_plus * sigma_bc) / gam_eff
    p_minus = (1j * gp * e_minus + 1j * a_minus * sigma_bc) / gam_eff
    return p_plus, p_minus


def step_full(
    state: SystemState,
    profile: ControlProfile,
    params: PhysicalParams,
    grid: Grid,
    dt: float | None = None,
) -> SystemState:
    """One Strang step of the full five-field system."""
    dt = grid.dt if dt is None else dt
    _require_unit_shift(grid, params, dt)
    rhs = _full_rhs_factory(profile, params, grid.z)
    f = state.fields()
    with np.errstate(invalid="ignore", over="ignore"):
        f = _rk4(f, state.t, 0.5 * dt, rhs)
        _shift_fields(f)
        f = _rk4(f, state.t + 0.5 * dt, 0.5 * dt, rhs)
    _check_finite(f, grid, state.t + dt)
    return SystemState(state.t + dt, *f)


def step_adiabatic(
    state: SystemState,
    profile: ControlProfile,
    params: PhysicalParams,
    grid: Grid,
    dt: float | None = None,
) -> SystemState:
    """One Strang step with the optical coherence adiabatically eliminated."""
    dt = grid.dt if dt is None else dt
    _require_unit_shift(grid, params, dt)
    if dt * params.gamma >= 1.0:
        warnings.warn(
            f"dt*gamma = {dt * params.gamma:.3g} >= 1; the adiabatic elimination "
            "assumes changes slow compared to 1/gamma",
            AdiabaticityWarning,
            stacklevel=2,
        )
    damping = params.coupling**2 / params.gamma * dt
    if damping > RK4_REAL_STABILITY:
        raise ValueError(
            f"explicit step unstable: (g_p^2/gamma)*dt = {damping:.3g} > {RK4_REAL_STABILITY}; "
            "refine the grid (dt = dz/c) or use step_full"
        )
    rhs = _adiabatic_rhs_factory(profile, params, grid.z)
    f = np.stack([state.e_plus, state.e_minus, state.sigma_bc])
    with np.errstate(invalid="ignore", over="ignore"):
        f = _rk4(f, state.t, 0.5 * dt, rhs)
        _shift_fields(f)
        f = _rk4(f, state.t + 0.5 * dt, 0.5 * dt, rhs)
    t_new = state.t + dt
    a_plus, a_minus = control_field_at(profile, grid.z, t_new, params)
    p_plus, p_minus = reconstruct_optical_coherence(f[0], f[1], f[2], a_plus, a_minus, params)
    full = np.stack([f[0], f[1], p_plus, p_minus, f[2]])
    _check_finite(full, grid, t_new)
    return SystemState(t_new, *full)


def local_rate_bound(
    profile: ControlProfile, params: PhysicalParams, grid: Grid, t_samples
) -> float:
    """Upper bound on the local oscillation/decay rates seen by the stepper."""
    rate = 0.0
    for t in np.atleast_1d(t_samples):
        a_plus, a_minus = control_field_at(profile, grid.z, float(t), params)
        omega0 = float(np.max(np.sqrt(np.abs(a_plus) ** 2 + np.abs(a_minus) ** 2)))
        rate = max(rate, math.hypot(params.coupling, omega0))
    detune = abs(params.one_photon_detuning) + abs(params.two_photon_detuning)
    return rate + params.gamma + detune + abs(params.carrier_offset) + params.gamma0


def observables(
    state: SystemState,
    phi_field: np.ndarray,
    grid: Grid,
    center: float = 0.0,
    boundary_buffer: int = 8,
) -> Observables:
    """Moments, excitation, peak density and matching ratio of a snapshot.

    Moments use midpoint quadrature with ``boundary_buffer`` cells excluded
    at each end to keep outflow cells out of the integrals.
    """
    z = grid.z
    dz = grid.dz
    phi = np.asarray(phi_field, dtype=float)
    e_sum = np.cos(phi) * state.e_plus + np.sin(phi) * state.e_minus

    density = (
        np.abs(state.e_plus) ** 2 + np.abs(state.e_minus) ** 2 + np.abs(state.sigma_bc) ** 2
    )
    n_tot = float(np.sum(density) * dz)
    peak = float(np.max(density))

    sl = slice(boundary_buffer, len(z) - boundary_buffer) if boundary_buffer > 0 else slice(None)
    zc = z[sl] - center
    area = np.sum(e_sum[sl]) * dz
    norm = np.sum(np.abs(e_sum[sl])) * dz
    if norm == 0.0 or abs(area) < 1e-9 * norm:
        width_sq = float("nan")
        first_moment = float("nan")
        defined = False
    else:
        width_sq = float(np.real(np.sum(zc**2 * e_sum[sl]) * dz / area))
        first_moment = float(np.real(np.sum(zc * e_sum[sl]) * dz / area))
        defined = True

    i_peak = int(np.argmax(np.abs(e_sum)))
    denom = state.e_minus[i_peak]
    ratio = complex(state.e_plus[i_peak] / denom) if denom != 0.0 else complex("nan")

    return Observables(
        t=state.t,
        width_sq=width_sq,
        first_moment_sum=first_moment,
        total_excitation=n_tot,
        peak_density=peak,
        ratio=ratio,
        moments_defined=defined,
    )


def run(config: "ScenarioConfig") -> SimulationResult:
    """Integrate a scenario and collect snapshots plus observables.

    The snapshot cadence is ``config.snapshot_every`` in time units; the
    initial state is always included.  Raises NumericalBlowupError with the
    failing field and position if the integration leaves the finite range.
    """
    grid = config.grid
    params = config.params
    profile = config.profile
    state = config.build_initial_state()
    stepper = step_full if config.solver == "full" else step_adiabatic

    dt = grid.dt
    n_steps = int(round(config.duration / dt))
    every = max(1, int(round(config.snapshot_every / dt)))

    def record(st: SystemState):
        phi = phi_field_at(profile, grid.z, st.t, params)
        times.append(st.t)
        states.append(st)
        obs.append(observables(st, phi, grid, center=config.moment_center))

    times: list[float] = []
    states: list[SystemState] = []
    obs: list[Observables] = []
    record(state)
    for k in range(n_steps):
        state = stepper(state, profile, params, grid, dt)
        if (k + 1) % every == 0 or k == n_steps - 1:
            record(state)
    return SimulationResult(np.asarray(times), states, obs)
