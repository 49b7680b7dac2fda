"""Declarative control-field profiles Omega_+0(z, t), Omega_-0(z, t).

Profiles are immutable and evaluate to finite complex amplitude pairs at any
point of their declared space-time domain.  Amplitudes are taken real and
positive unless a comb component explicitly carries a phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import PhysicalParams

__all__ = [
    "TanhRamp",
    "FocusPath",
    "HomogeneousProfile",
    "TanhSchedule",
    "GaussianFoci",
    "CombTone",
    "CombProfile",
    "ControlProfile",
    "control_field_at",
    "phi_field_at",
    "cos_2phi_at",
    "BeamLawDomainError",
]

DEFAULT_OMEGA_MAX_OVER_COUPLING = 1e3


class BeamLawDomainError(ValueError):
    """The linear beam-width law was evaluated outside its validity window."""


@dataclass(frozen=True)
class TanhRamp:
    """Smooth switch 0 -> 1 of the form 0.5*(1 + tanh(rate*(t - center)))."""

    center: float
    rate: float = 0.1

    def __call__(self, t: float) -> float:
        return 0.5 * (1.0 + math.tanh(self.rate * (t - self.center)))


@dataclass(frozen=True)
class FocusPath:
    """Focus position z_f(t) = start + shift * 0.5*(1 + tanh(rate*(t - center)))."""

    start: float
    shift: float = 0.0
    rate: float = 0.0125
    center: float = 0.0

    def __call__(self, t: float) -> float:
        if self.shift == 0.0:
            return self.start
        return self.start + self.shift * 0.5 * (1.0 + math.tanh(self.rate * (t - self.center)))


@dataclass(frozen=True)
class HomogeneousProfile:
    """Spatially uniform beams with optional smooth switch-on.

    ``omega_plus``/``omega_minus`` are the steady amplitudes; if ``ramp`` is
    given both beams are multiplied by the same switch-on factor.
    """

    omega_plus: float
    omega_minus: float
    ramp: TanhRamp | None = None

    def amplitudes(self, z: np.ndarray, t: float, params: PhysicalParams):
        r = 1.0 if self.ramp is None else self.ramp(t)
        shape = np.ones_like(np.asarray(z, dtype=float))
        return self.omega_plus * r * shape, self.omega_minus * r * shape


@dataclass(frozen=True)
class TanhSchedule:
    """Storage/retrieval schedule declared through cos(theta_pm)**2 levels.

    cos2_plus(t)  = storage_level  * 0.5*(1 - tanh(rate*(t - switch_off)))
                  + retrieve_level * 0.5*(1 + tanh(rate*(t - switch_on)))
    cos2_minus(t) = retrieve_level * 0.5*(1 + tanh(rate*(t - switch_on)))

    Each level is converted to an amplitude through
    Omega = g_p*sqrt(cos2/(1 - cos2)), capped at ``omega_max`` (in units of
    g_p) to keep the cos2 -> 1 free-propagation limit finite.
    """

    switch_off: float = 65.0
    switch_on: float = 300.0
    rate: float = 0.1
    storage_level: float = 1.0
    retrieve_level: float = 1.0 / 3.0
    omega_max: float = DEFAULT_OMEGA_MAX_OVER_COUPLING

    def cos2_plus(self, t: float) -> float:
        return self.storage_level * 0.5 * (1.0 - math.tanh(self.rate * (t - self.switch_off))) \
            + self.retrieve_level * 0.5 * (1.0 + math.tanh(self.rate * (t - self.switch_on)))

    def cos2_minus(self, t: float) -> float:
        return self.retrieve_level * 0.5 * (1.0 + math.tanh(self.rate * (t - self.switch_on)))

    def _amplitude(self, cos2: float, params: PhysicalParams) -> float:
        cap = self.omega_max * params.coupling
        cos2 = min(max(cos2, 0.0), 1.0)
        if cos2 >= 1.0:
            return cap
        return min(params.coupling * math.sqrt(cos2 / (1.0 - cos2)), cap)

    def amplitudes(self, z: np.ndarray, t: float, params: PhysicalParams):
        shape = np.ones_like(np.asarray(z, dtype=float))
        a_plus = self._amplitude(self.cos2_plus(t), params)
        a_minus = self._amplitude(self.cos2_minus(t), params)
        return a_plus * shape, a_minus * shape


def _paraxial_width(dist: np.ndarray, rayleigh_range: float) -> np.ndarray:
    return np.sqrt(1.0 + (dist / rayleigh_range) ** 2)


def _literal_width_sq(dist: np.ndarray) -> np.ndarray:
    return 1.0 - 2.0 * dist / math.pi


@dataclass(frozen=True)
class GaussianFoci:
    """Counter-propagating beams with separated (possibly moving) foci.

    The forward beam peaks at ``focus_plus`` and the backward beam at
    ``focus_minus``; placing the forward focus below the backward one traps
    the pulse between them.  ``beam_law`` selects the width model:

    * ``"paraxial"``: w(d) = sqrt(1 + (d/rayleigh_range)**2), the standard
      Gaussian-beam law.  Near the midpoint the normalized intensity
      difference is linear with slope -1/l, l = (z_R**2 + b**2)/(2b) for
      half-separation b.
    * ``"literal"``: w(d) = sqrt(1 - 2d/pi), a linearized law valid only for
      d < pi/2; evaluation outside that window raises BeamLawDomainError.
    """

    amplitude: float = 1.0
    focus_plus: FocusPath = field(default_factory=lambda: FocusPath(-20.0))
    focus_minus: FocusPath = field(default_factory=lambda: FocusPath(20.0))
    rayleigh_range: float = 10.0
    beam_law: str = "paraxial"
    ramp: TanhRamp | None = None

    def __post_init__(self) -> None:
        if self.beam_law not in ("paraxial", "literal"):
            raise ValueError(f"unknown beam_law {self.beam_law!r}")
        if self.beam_law == "paraxial" and self.rayleigh_range <= 0.0:
            raise ValueError("rayleigh_range must be positive")

    def _beam(self, z: np.ndarray, focus: float) -> np.ndarray:
        dist = np.asarray(z, dtype=float) - focus
        if self.beam_law == "paraxial":
            return self.amplitude / _paraxial_width(dist, self.rayleigh_range)
        wsq = _literal_width_sq(dist)
        if np.any(wsq <= 0.0):
            bad = np.asarray(z)[np.asarray(wsq <= 0.0)]
            raise BeamLawDomainError(
                f"literal beam law invalid at z={np.atleast_1d(bad)[0]:.3g} "
                f"(focus {focus:.3g}); valid only for z - focus < pi/2"
            )
        return self.amplitude / np.sqrt(wsq)

    def amplitudes(self, z: np.ndarray, t: float, params: PhysicalParams):
        r = 1.0 if self.ramp is None else self.ramp(t)
        return (r * self._beam(z, self.focus_plus(t)),
                r * self._beam(z, self.focus_minus(t)))


@dataclass(frozen=True)
class CombTone:
    """One frequency component of a comb drive: detuning and pair amplitudes."""

    detuning: float
    omega_plus: complex
    omega_minus: complex

    def __post_init__(self) -> None:
        if not math.isclose(abs(self.omega_plus), abs(self.omega_minus),
                            rel_tol=1e-12, abs_tol=0.0):
            raise ValueError(
                "comb tones require equal forward/backward intensities: "
                f"|{self.omega_plus}| != |{self.omega_minus}|"
            )


@dataclass(frozen=True)
class CombProfile:
    """Multi-tone retrieve field; exactly one tone must sit at zero detuning.

    The far-detuned tones must satisfy |Delta_k| >> gamma and
    |Delta_k| >> |Omega_k| for the component-resolved treatment to apply;
    this is checked loosely (factor of 3) at construction against ``gamma_ref``
    when provided.
    """

    tones: tuple[CombTone, ...]
    ramp: TanhRamp | None = None
    gamma_ref: float | None = None

    def __post_init__(self) -> None:
        resonant = [tone for tone in self.tones if tone.detuning == 0.0]
        if len(resonant) != 1:
            raise ValueError(
                f"need exactly one resonant tone (detuning 0), got {len(resonant)}"
            )
        if self.gamma_ref is not None:
            for tone in self.tones:
                if tone.detuning == 0.0:
                    continue
                if abs(tone.detuning) < 3.0 * max(self.gamma_ref, abs(tone.omega_plus)):
                    raise ValueError(
                        f"off-resonant tone at {tone.detuning} violates "
                        "|Delta_k| >> gamma, |Omega_k|"
                    )

    @property
    def resonant(self) -> CombTone:
        return next(tone for tone in self.tones if tone.detuning == 0.0)

    def ramp_factor(self, t: float) -> float:
        return 1.0 if self.ramp is None else self.ramp(t)

    def amplitudes(self, z: np.ndarray, t: float, params: PhysicalParams):
        # resonant pair only; the detuned tones live in their own rotating
        # frames and are handled by the comb evolver
        r = self.ramp_factor(t)
        shape = np.ones_like(np.asarray(z, dtype=float))
        tone = self.resonant
        return tone.omega_plus * r * shape, tone.omega_minus * r * shape

    def envelope(self, z: np.ndarray, t: float, params: PhysicalParams) -> np.ndarray:
        """Total slowly-varying drive envelope with the comb phases attached."""
        z = np.asarray(z, dtype=float)
        c = params.light_speed
        r = self.ramp_factor(t)
        total = np.zeros(z.shape, dtype=complex)
        for tone in self.tones:
            total += tone.omega_plus * np.exp(-1j * tone.detuning * (t - z / c))
            total += tone.omega_minus * np.exp(-1j * tone.detuning * (t + z / c))
        return r * total


ControlProfile = HomogeneousProfile | TanhSchedule | GaussianFoci | CombProfile


def control_field_at(profile: ControlProfile, z, t: float, params: PhysicalParams):
    """Evaluate (Omega_+0, Omega_-0) on the given positions at time t."""
    scalar = np.isscalar(z)
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    a_plus, a_minus = profile.amplitudes(z_arr, t, params)
    a_plus = np.asarray(a_plus, dtype=complex)
    a_minus = np.asarray(a_minus, dtype=complex)
    if not (np.all(np.isfinite(a_plus)) and np.all(np.isfinite(a_minus))):
        raise ValueError(f"profile produced non-finite amplitudes at t={t}")
    if scalar:
        return complex(a_plus[0]), complex(a_minus[0])
    return a_plus, a_minus


def phi_field_at(profile: ControlProfile, z, t: float, params: PhysicalParams) -> np.ndarray:
    """Beam-balance angle phi(z) = atan2(|Omega_-|, |Omega_+|) at time t."""
    a_plus, a_minus = control_field_at(profile, np.atleast_1d(z), t, params)
    return np.arctan2(np.abs(a_minus), np.abs(a_plus))


def cos_2phi_at(profile: ControlProfile, z, t: float, params: PhysicalParams) -> np.ndarray:
    """Normalized intensity difference (|Omega_+|^2 - |Omega_-|^2)/Omega_0^2."""
    a_plus, a_minus = control_field_at(profile, np.atleast_1d(z), t, params)
    w_plus = np.abs(a_plus) ** 2
    w_minus = np.abs(a_minus) ** 2
    total = w_plus + w_minus
    out = np.zeros_like(total)
    np.divide(w_plus - w_minus, total, out=out, where=total > 0.0)
    return out
