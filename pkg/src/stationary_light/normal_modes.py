"""Sum/difference normal modes of the counter-propagating probe fields.

The rotation E_S = cos(phi) E_+ + sin(phi) E_-, E_D = sin(phi) E_+ - cos(phi) E_-
diagonalizes the damping: E_D is absorbed at the bare rate c/l_abs while E_S
evolves slowly.  Eliminating E_D gives a drift-diffusion description whose
closed-form moment laws are implemented here alongside a direct integrator
of the coupled mode equations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .params import Grid, PhysicalParams

__all__ = [
    "NormalModeState",
    "MomentState",
    "EliminationValidityWarning",
    "to_normal_modes",
    "from_normal_modes",
    "evolve_normal_modes",
    "adiabatic_difference_mode",
    "diffusion_evolve",
    "width_law",
    "diffusive_decay",
    "exact_width",
    "exact_width_series",
    "drift_parameters",
    "moments_of_modes",
]


class EliminationValidityWarning(UserWarning):
    """The adiabatic elimination of E_D was used outside its safe regime."""


@dataclass(frozen=True)
class NormalModeState:
    """Sum and difference envelopes with their rotation angle profile."""

    t: float
    e_sum: np.ndarray
    e_diff: np.ndarray
    phi_field: np.ndarray
    theta: float

    def __post_init__(self) -> None:
        if not (len(self.e_sum) == len(self.e_diff) == len(self.phi_field)):
            raise ValueError("mode arrays must share one grid length")


@dataclass(frozen=True)
class MomentState:
    """Second moment of E_S, first moment of E_D, and the conserved area."""

    width_sq: float
    diff_first_moment: float
    area: complex


def to_normal_modes(e_plus: np.ndarray, e_minus: np.ndarray, phi) -> tuple[np.ndarray, np.ndarray]:
    phi = np.asarray(phi, dtype=float)
    e_sum = np.cos(phi) * e_plus + np.sin(phi) * e_minus
    e_diff = np.sin(phi) * e_plus - np.cos(phi) * e_minus
    return e_sum, e_diff


def from_normal_modes(e_sum: np.ndarray, e_diff: np.ndarray, phi) -> tuple[np.ndarray, np.ndarray]:
    phi = np.asarray(phi, dtype=float)
    e_plus = np.cos(phi) * e_sum + np.sin(phi) * e_diff
    e_minus = np.sin(phi) * e_sum - np.cos(phi) * e_diff
    return e_plus, e_minus


def _d_dz_compact(f: np.ndarray, dz: float) -> np.ndarray:
    """Fourth-order centered derivative of a compactly supported field."""
    fp = np.concatenate((np.zeros(2, dtype=f.dtype), f, np.zeros(2, dtype=f.dtype)))
    return (-fp[4:] + 8.0 * fp[3:-1] - 8.0 * fp[1:-3] + fp[:-4]) / (12.0 * dz)


def evolve_normal_modes(
    state: NormalModeState,
    params: PhysicalParams,
    grid: Grid,
    dt: float,
) -> NormalModeState:
    """One RK4 step of the coupled sum/difference equations.

    phi may vary in z (static in time); theta is constant.  Fields must be
    compactly supported away from the boundary, where a zero extension is
    assumed.  Explicit stability requires dt*(g_p^2/gamma) and c*dt/dz to
    stay below the RK4 limits; both are checked.
    """
    c = params.light_speed
    v_gr = c * math.cos(state.theta) ** 2
    gam_eff = params.gamma + 1j * (params.one_photon_detuning + params.two_photon_detuning)
    damping = params.coupling**2 / abs(gam_eff)
    dz = grid.dz
    if damping * dt > 2.6:
        raise ValueError(
            f"dt too large for the E_D damping rate: dt*g_p^2/|Gamma| = {damping * dt:.3g} > 2.6"
        )
    if c * dt / dz > 0.7:
        raise ValueError(
            f"advective CFL for the centered scheme exceeded: c*dt/dz = {c * dt / dz:.3g} > 0.7"
        )

    phi = state.phi_field
    sin2 = np.sin(2.0 * phi)
    cos2 = np.cos(2.0 * phi)
    dphi = np.gradient(phi, dz)
    rate_d = params.coupling**2 / gam_eff

    def rhs(f: np.ndarray) -> np.ndarray:
        e_s, e_d = f
        ds = _d_dz_compact(e_s, dz)
        dd = _d_dz_compact(e_d, dz)
        out = np.empty_like(f)
        out[0] = (
            -v_gr * cos2 * ds - v_gr * sin2 * dd + v_gr * dphi * (sin2 * e_s - cos2 * e_d)
        )
        out[1] = (
            c * cos2 * dd - c * sin2 * ds - rate_d * e_d - c * dphi * (cos2 * e_s + sin2 * e_d)
        )
        return out

    f = np.stack([state.e_sum.astype(complex), state.e_diff.astype(complex)])
    k1 = rhs(f)
    k2 = rhs(f + 0.5 * dt * k1)
    k3 = rhs(f + 0.5 * dt * k2)
    k4 = rhs(f + dt * k3)
    f = f + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return NormalModeState(state.t + dt, f[0], f[1], phi, state.theta)


def adiabatic_difference_mode(
    e_sum: np.ndarray,
    phi_field: np.ndarray,
    params: PhysicalParams,
    grid: Grid,
) -> np.ndarray:
    """Difference mode slaved to the sum mode in an optically thick medium.

    E_D = -sin(2 phi) l_abs dE_S/dz - cos(2 phi) l_abs (d phi/dz) E_S, which
    reduces to -l_abs dE_S/dz for homogeneous equal beams.  Outside the
    validity regime (envelope scale or 1/phi' not large against l_abs) an
    EliminationValidityWarning is issued and the value returned anyway.
    """
    l_abs = params.absorption_length
    dz = grid.dz
    phi = np.asarray(phi_field, dtype=float)
    e_sum = np.asarray(e_sum, dtype=complex)
    d_es = _d_dz_compact(e_sum, dz)
    dphi = np.gradient(phi, dz)

    interior = slice(4, -4) if len(e_sum) > 8 else slice(None)
    scale = np.max(np.abs(e_sum))
    if scale > 0.0:
        grad_scale = np.max(np.abs(d_es[interior])) / scale
        if grad_scale * l_abs > 0.3:
            warnings.warn(
                f"envelope varies on {1.0 / max(grad_scale, 1e-300):.3g}, not large "
                f"against l_abs={l_abs:.3g}; elimination marginal",
                EliminationValidityWarning,
                stacklevel=2,
            )
    if np.max(np.abs(dphi * np.sin(2.0 * phi))) * l_abs > 0.3:
        warnings.warn(
            "d(phi)/dz too steep for the elimination; result is approximate",
            EliminationValidityWarning,
            stacklevel=2,
        )
    return -np.sin(2.0 * phi) * l_abs * d_es - np.cos(2.0 * phi) * l_abs * dphi * e_sum


def diffusion_evolve(e_sum0: np.ndarray, dz: float, diffusivity: float, t: float) -> np.ndarray:
    """Exact heat-kernel propagation of a compactly supported envelope.

    Spectral evaluation with zero padding: a Gaussian of variance s**2 maps
    to one of variance s**2 + 2*D*t and the integral is preserved.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if diffusivity < 0.0:
        raise ValueError("diffusivity must be non-negative")
    if t == 0.0 or diffusivity == 0.0:
        return np.array(e_sum0, dtype=complex, copy=True)
    f = np.asarray(e_sum0, dtype=complex)
    n = len(f)
    padded = np.concatenate([f, np.zeros(n, dtype=complex)])
    k = 2.0 * np.pi * np.fft.fftfreq(2 * n, d=dz)
    transformed = np.fft.fft(padded) * np.exp(-diffusivity * t * k**2)
    return np.fft.ifft(transformed)[:n]


def width_law(d0: float, diffusivity: float, t, t0: float = 0.0):
    """Diffusive width growth d(t) = d0 + 2 D (t - t0)."""
    return d0 + 2.0 * diffusivity * (np.asarray(t) - t0)


def diffusive_decay(n0: float, dz0: float, diffusivity: float, t):
    """Excitation decay n(t) = n0 * dz0 / sqrt(dz0**2 + 2 D t) during diffusion."""
    return n0 * dz0 / np.sqrt(dz0**2 + 2.0 * diffusivity * np.asarray(t))


def exact_width(d0: float, g0: float, diffusivity: float, l_abs: float, c: float, t):
    """Closed-form second moment at finite optical depth, constant v_gr.

    d(t) = d0 + 2 D t + 2 D (l_abs/c) (1 - g0/l_abs) (exp(-c t/l_abs) - 1),
    the solution of the coupled moment system d' = 2 v_gr g, g' = c (1 - g/l_abs).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be non-negative")
    relax = np.exp(-c * t / l_abs) - 1.0
    return d0 + 2.0 * diffusivity * t + 2.0 * diffusivity * (l_abs / c) * (1.0 - g0 / l_abs) * relax


def exact_width_series(
    d0: float,
    g0: float,
    l_abs: float,
    c: float,
    v_gr_of_t,
    t_grid: np.ndarray,
    oversample: int = 20,
) -> np.ndarray:
    """Second moment with time-dependent group velocity.

    g(t) relaxes independently of v_gr, g(t) = l_abs + (g0 - l_abs) e^{-c t/l_abs},
    so d(t) = d0 + 2 int_0^t v_gr(t') g(t') dt', evaluated by composite
    trapezoid on an oversampled copy of ``t_grid``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] < 0.0 or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    fine = np.linspace(t_grid[0], t_grid[-1], 2 * oversample * max(len(t_grid) - 1, 1) + 1)
    g = l_abs + (g0 - l_abs) * np.exp(-c * fine / l_abs)
    v = np.asarray([v_gr_of_t(tt) for tt in fine], dtype=float)
    integrand = 2.0 * v * g
    h = fine[1] - fine[0]
    # composite Simpson over consecutive point pairs
    cumulative = np.zeros_like(fine)
    simpson_pairs = (h / 3.0) * (integrand[:-2:2] + 4.0 * integrand[1:-1:2] + integrand[2::2])
    cumulative[2::2] = np.cumsum(simpson_pairs)
    # odd nodes by local trapezoid refinement against the even backbone
    cumulative[1::2] = cumulative[:-1:2] + (h / 12.0) * (
        5.0 * integrand[:-1:2] + 8.0 * integrand[1::2] - integrand[2::2]
    )
    return d0 + np.interp(t_grid, fine, cumulative)


def drift_parameters(params: PhysicalParams, theta: float, phi: float) -> tuple[float, float]:
    """Drift speed and modified diffusivity for unequal constant beams.

    Returns (v_gr cos(2 phi), v_gr l_abs sin(2 phi)**2).
    """
    v_gr = params.light_speed * math.cos(theta) ** 2
    return (
        v_gr * math.cos(2.0 * phi),
        v_gr * params.absorption_length * math.sin(2.0 * phi) ** 2,
    )


def moments_of_modes(
    e_sum: np.ndarray, e_diff: np.ndarray, z: np.ndarray, center: float = 0.0
) -> MomentState:
    """Midpoint-quadrature moments entering the closed moment system."""
    dz = z[1] - z[0]
    area = np.sum(e_sum) * dz
    if area == 0.0:
        raise ValueError("sum-mode area vanishes; moments undefined")
    zc = z - center
    width_sq = float(np.real(np.sum(zc**2 * e_sum) * dz / area))
    g1 = float(np.real(np.sum(zc * e_diff) * dz / area))
    return MomentState(width_sq=width_sq, diff_first_moment=g1, area=complex(area))
