"""Physical parameters, grids, and mixing-angle relations.

All quantities are expressed in simulation units where the collective
coupling rate g_p = g*sqrt(N) and the vacuum speed of light set the scales:
the defaults g_p = 1 and c = 1 make time come out in units of 1/g_p and
length in units of c/g_p.  In these units the resonant absorption length is
l_abs = c*gamma/g_p**2, i.e. numerically equal to gamma when g_p = c = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhysicalParams",
    "Grid",
    "MixingAngles",
    "mixing_angles",
    "group_velocity",
    "phase_matched_detuning",
    "DegenerateControlError",
]


class DegenerateControlError(ValueError):
    """Both control amplitudes vanish, so the mixing angles are undefined."""


@dataclass(frozen=True)
class PhysicalParams:
    """Rates and detunings of the Lambda medium.

    coupling            g_p = g*sqrt(N), collective probe coupling rate
    gamma               radiative decay rate of the excited state
    gamma0              ground-state coherence decay rate (0 in the ideal medium)
    light_speed         vacuum speed of light c
    one_photon_detuning Delta, drive detuning from the excited state
    two_photon_detuning delta, Raman (two-photon) detuning
    carrier_offset      Delta_omega = omega - omega_c, probe carrier offset
    wavevector_mismatch Delta_K = k_c - k (only relevant off the degenerate scheme)
    """

    coupling: float = 1.0
    gamma: float = 1.0
    gamma0: float = 0.0
    light_speed: float = 1.0
    one_photon_detuning: float = 0.0
    two_photon_detuning: float = 0.0
    carrier_offset: float = 0.0
    wavevector_mismatch: float = 0.0

    def __post_init__(self) -> None:
        if self.coupling <= 0.0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.gamma0 < 0.0:
            raise ValueError(f"gamma0 must be non-negative, got {self.gamma0}")
        if self.light_speed <= 0.0:
            raise ValueError(f"light_speed must be positive, got {self.light_speed}")

    @property
    def absorption_length(self) -> float:
        """Resonant absorption length without EIT, l_abs = c*gamma/g_p**2."""
        return self.light_speed * self.gamma / self.coupling**2

    def optical_depth(self, length: float) -> float:
        """On-resonance optical depth of a medium of the given length."""
        return length / self.absorption_length


@dataclass(frozen=True)
class Grid:
    """Uniform 1D spatial grid plus the time step of the propagation scheme.

    If ``dt`` is omitted it defaults to dz/c for unit light speed; the field
    solvers additionally require c*dt == dz so that advection is an exact
    one-cell shift per step.
    """

    z_min: float
    z_max: float
    n_points: int
    dt: float | None = None

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise ValueError(f"n_points must be >= 3, got {self.n_points}")
        if not self.z_max > self.z_min:
            raise ValueError("z_max must exceed z_min")
        if self.dt is None:
            object.__setattr__(self, "dt", self.dz)
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_points)

    def cfl_number(self, light_speed: float) -> float:
        return light_speed * self.dt / self.dz

    def validate_cfl(self, light_speed: float) -> None:
        cfl = self.cfl_number(light_speed)
        if cfl > 1.0 + 1e-12:
            raise ValueError(
                f"CFL number c*dt/dz = {cfl:.6g} exceeds 1; "
                f"reduce dt below {self.dz / light_speed:.6g}"
            )


@dataclass(frozen=True)
class MixingAngles:
    """Polariton angle theta and beam-ratio angle phi, both in [0, pi/2]."""

    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError(f"theta out of range [0, pi/2]: {self.theta}")
        if not 0.0 <= self.phi <= math.pi / 2:
            raise ValueError(f"phi out of range [0, pi/2]: {self.phi}")


def mixing_angles(
    params: PhysicalParams,
    omega_plus: complex,
    omega_minus: complex,
) -> MixingAngles:
    """Mixing angles for a pair of control amplitudes.

    tan(theta)**2 = g_p**2 / (|Omega_+|**2 + |Omega_-|**2) sets the polariton
    composition, tan(phi)**2 = |Omega_-|**2 / |Omega_+|**2 the beam balance.
    """
    w_plus = abs(omega_plus) ** 2
    w_minus = abs(omega_minus) ** 2
    total = w_plus + w_minus
    if total == 0.0:
        raise DegenerateControlError(
            "both control amplitudes are zero; theta and phi are undefined"
        )
    theta = math.atan2(params.coupling, math.sqrt(total))
    phi = math.atan2(math.sqrt(w_minus), math.sqrt(w_plus))
    return MixingAngles(theta=theta, phi=phi)


def group_velocity(params: PhysicalParams, theta: float) -> float:
    """EIT group velocity v_gr = c*cos(theta)**2."""
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta out of range [0, pi/2]: {theta}")
    return params.light_speed * math.cos(theta) ** 2


def phase_matched_detuning(params: PhysicalParams, theta: float) -> float:
    """Two-photon detuning that cancels the phase-mismatch term.

    delta = -Delta_omega * cot(theta)**2, which approaches
    -Delta_omega * v_gr/c in the slow-light regime.  Rejected at theta = 0
    where the cotangent diverges.
    """
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]; cot(theta)**2 diverges at 0")
    return -params.carrier_offset / math.tan(theta) ** 2
