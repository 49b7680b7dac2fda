"""Drift-diffusion analytics for spatially modulated retrieve beams.

A linearly varying normalized intensity difference, cos(2 phi) ~ -z/l, turns
the sum-mode equation into the Fokker-Planck equation of an
Ornstein-Uhlenbeck process.  Its spectrum is harmonic-oscillator-like:
eigenvalues n*v_gr/l with Hermite-function modes of length sqrt(l*l_abs),
which gives closed-form initial-value solutions and the cavity-like
excitation decay rate v_gr/l.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .params import PhysicalParams
from .profiles import ControlProfile, cos_2phi_at

__all__ = [
    "OUParams",
    "HermiteExpansion",
    "TruncationError",
    "fpe_coefficients",
    "ou_stationary",
    "hermite_modes",
    "normalized_hermite",
    "ou_initial_value",
    "project_onto_modes",
    "cavity_decay",
    "fit_focal_scale",
]


class TruncationError(ValueError):
    """The Hermite truncation cannot represent the requested initial field."""


@dataclass(frozen=True)
class OUParams:
    """Scales of the linear-drift regime: cos(2 phi) = -z/l.

    The oscillator length sqrt(l*l_abs) must be small against l for the
    linear analysis to hold; construction only requires it to be positive.
    """

    l: float
    l_abs: float
    v_gr: float

    def __post_init__(self) -> None:
        if self.l <= 0.0 or self.l_abs <= 0.0:
            raise ValueError("l and l_abs must be positive")
        if self.v_gr < 0.0:
            raise ValueError("v_gr must be non-negative")

    @property
    def oscillator_length(self) -> float:
        return math.sqrt(self.l * self.l_abs)

    @property
    def hermite_scale(self) -> float:
        """Argument scale of the Hermite modes, sqrt(2*l*l_abs)."""
        return math.sqrt(2.0 * self.l * self.l_abs)

    @property
    def diffusivity(self) -> float:
        return self.v_gr * self.l_abs

    @property
    def decay_rate(self) -> float:
        """Effective cavity decay rate v_gr/l of the total excitation."""
        return self.v_gr / self.l


@dataclass(frozen=True)
class HermiteExpansion:
    """Mode coefficients of an initial sum-mode profile."""

    coefficients: np.ndarray
    scale: float
    eigenvalues: np.ndarray
    truncation: int


def fpe_coefficients(
    phi_field: np.ndarray,
    z: np.ndarray,
    params: PhysicalParams,
    theta: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients of dE_S/dt = A0 E_S + d/dz[A1 E_S] + d2/dz2[D E_S].

    With L = l_abs, s = sin(2 phi), c2 = cos(2 phi), p = d(phi)/dz:

        A0 = -v_gr [ p s + 2 L p^2 s^2 - L p^2 c2^2 - L p'' ... c2 s ]
        A1 = -v_gr c2 (1 + 4 L s p)
        D  = v_gr L s^2

    This set is the exact conservation-form rewrite of the sum-mode equation
    after eliminating E_D, so the homogeneous limit reproduces the drift
    v_gr cos(2 phi) with diffusivity v_gr l_abs sin(2 phi)^2, and the linear
    regime reproduces the restoring drift v_gr z/l with A0 -> -v_gr/(2 l).
    """
    phi = np.asarray(phi_field, dtype=float)
    z = np.asarray(z, dtype=float)
    dz = z[1] - z[0]
    v_gr = params.light_speed * math.cos(theta) ** 2
    l_abs = params.absorption_length

    dphi = np.gradient(phi, dz)
    ddphi = np.gradient(dphi, dz)
    interior_jump = np.max(np.abs(np.diff(ddphi[2:-2]))) if len(z) > 8 else 0.0
    scale = np.max(np.abs(ddphi)) + 1e-300
    if interior_jump > 0.5 * scale and np.max(np.abs(dphi)) * dz > 1e-12:
        warnings.warn(
            "phi profile is rough at the grid scale; finite-difference "
            "derivatives of phi may be inaccurate",
            UserWarning,
            stacklevel=2,
        )

    sin2 = np.sin(2.0 * phi)
    cos2 = np.cos(2.0 * phi)
    a0 = -v_gr * (
        dphi * sin2
        + 2.0 * l_abs * dphi**2 * sin2**2
        - l_abs * dphi**2 * cos2**2
        - l_abs * ddphi * cos2 * sin2
    )
    a1 = -v_gr * cos2 * (1.0 + 4.0 * l_abs * sin2 * dphi)
    diff = v_gr * l_abs * sin2**2
    return a0, a1, diff


def ou_stationary(ou: OUParams, z, t: float) -> np.ndarray:
    """Slowest-decaying profile exp(-z^2/(2 l l_abs)) * exp(-v_gr t/(2 l))."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    z = np.asarray(z, dtype=float)
    return np.exp(-(z**2) / (2.0 * ou.l * ou.l_abs)) * math.exp(-ou.v_gr * t / (2.0 * ou.l))


def normalized_hermite(n: int, x: np.ndarray) -> np.ndarray:
    """H_n(x)/sqrt(2^n n!) by stable three-term recurrence."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev
    h = math.sqrt(2.0) * x
    with np.errstate(invalid="ignore", over="ignore"):
        for k in range(1, n):
            h_next = x * math.sqrt(2.0 / (k + 1)) * h - math.sqrt(k / (k + 1.0)) * h_prev
            h_prev, h = h, h_next
    if not np.all(np.isfinite(h)):
        raise OverflowError(
            f"Hermite recurrence overflowed at order {n} on the requested range"
        )
    return h


def hermite_modes(n: int, ou: OUParams) -> tuple[float, Callable[[np.ndarray], np.ndarray]]:
    """Eigenvalue n*v_gr/l and eigenfunction of the backward OU generator.

    The returned callable evaluates Phi_n(z) = H_n(z/sqrt(2 l l_abs)) / sqrt(2^n n!),
    which satisfies D Phi'' - v_gr (z/l) Phi' + lambda_n Phi = 0.
    """
    lam = n * ou.v_gr / ou.l
    s0 = ou.hermite_scale

    def mode(z: np.ndarray) -> np.ndarray:
        return normalized_hermite(n, np.asarray(z, dtype=float) / s0)

    return lam, mode


def project_onto_modes(
    e_sum0,
    ou: OUParams,
    truncation: int,
    z_grid: np.ndarray | None = None,
    quad_points: int | None = None,
) -> HermiteExpansion:
    """Coefficients c_n = int dz E_S(z, 0) H_n(z/scale) / sqrt(2^n n!).

    A callable initial field is integrated by Gauss-Hermite quadrature after
    the variable change x = z/scale (the weights are re-exponentiated since
    the integrand carries no Gaussian weight); a gridded field falls back to
    trapezoid quadrature after checking that it has decayed at the grid ends.
    """
    if truncation < 0:
        raise ValueError("truncation must be non-negative")
    s0 = ou.hermite_scale
    n_modes = truncation + 1

    if callable(e_sum0):
        n_quad = quad_points or max(4 * n_modes + 40, 80)
        nodes, weights = np.polynomial.hermite.hermgauss(n_quad)
        values = np.asarray(e_sum0(s0 * nodes), dtype=complex)
        lifted = weights * np.exp(nodes**2) * values
        coeff = np.array(
            [s0 * np.sum(lifted * normalized_hermite(n, nodes)) for n in range(n_modes)]
        )
    else:
        if z_grid is None:
            raise ValueError("z_grid is required for a gridded initial field")
        field = np.asarray(e_sum0, dtype=complex)
        edge = max(abs(field[0]), abs(field[-1]))
        peak = np.max(np.abs(field))
        if peak > 0.0 and edge > 1e-8 * peak:
            warnings.warn(
                "initial field has not decayed at the grid ends; projection "
                "integrals may be inaccurate",
                UserWarning,
                stacklevel=2,
            )
        dz = z_grid[1] - z_grid[0]
        x = z_grid / s0
        coeff = np.array(
            [np.trapezoid(field * normalized_hermite(n, x), dx=dz) for n in range(n_modes)]
        )
    lam = np.arange(n_modes) * ou.v_gr / ou.l
    return HermiteExpansion(coefficients=coeff, scale=s0, eigenvalues=lam, truncation=truncation)


def _reconstruct(expansion: HermiteExpansion, ou: OUParams, z: np.ndarray, t: float) -> np.ndarray:
    s0 = expansion.scale
    x = np.asarray(z, dtype=float) / s0
    weight = np.exp(-(x**2))
    norm = 1.0 / (s0 * math.sqrt(math.pi))
    out = np.zeros_like(x, dtype=complex)
    for n, c in enumerate(expansion.coefficients):
        decay = math.exp(-ou.v_gr * (n + 0.5) * t / ou.l)
        out += c * norm * weight * normalized_hermite(n, x) * decay
    return out


def ou_initial_value(
    e_sum0,
    ou: OUParams,
    t: float,
    truncation: int,
    z_out: np.ndarray,
    z_grid: np.ndarray | None = None,
    reconstruction_tol: float = 1e-2,
) -> np.ndarray:
    """Initial-value solution of the OU sum-mode equation by mode expansion.

    E_S(z, t) = sum_n c_n (2^{n+1} n! pi l l_abs)^{-1/2} e^{-z^2/(2 l l_abs)}
                H_n(z/scale) e^{-v_gr (n + 1/2) t / l}

    Raises TruncationError when the reconstruction of the initial field
    misses it by more than ``reconstruction_tol`` in relative L2 norm.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    expansion = project_onto_modes(e_sum0, ou, truncation, z_grid=z_grid)
    z_check = np.asarray(z_grid if z_grid is not None else z_out, dtype=float)
    target = (
        np.asarray(e_sum0(z_check), dtype=complex)
        if callable(e_sum0)
        else np.asarray(e_sum0, dtype=complex)
    )
    recon = _reconstruct(expansion, ou, z_check, 0.0)
    denom = np.linalg.norm(target)
    if denom > 0.0:
        residual = np.linalg.norm(recon - target) / denom
        if residual > reconstruction_tol:
            raise TruncationError(
                f"truncation {truncation} reconstructs the initial field to "
                f"{residual:.3g} (> {reconstruction_tol:g}); try roughly "
                f"{2 * (truncation + 1)} modes"
            )
    return _reconstruct(expansion, ou, np.asarray(z_out, dtype=float), t)


def cavity_decay(n0: float, ou: OUParams, t):
    """Total-excitation decay n(t) = n0 exp(-v_gr t / l) in the trapped regime."""
    return n0 * np.exp(-ou.decay_rate * np.asarray(t, dtype=float))


def fit_focal_scale(
    profile: ControlProfile,
    params: PhysicalParams,
    t: float = 0.0,
    n_iter: int = 3,
    n_samples: int = 401,
    initial_l: float | None = None,
) -> float:
    """Least-squares scale l of cos(2 phi)(z) ~ -z/l near the trap center.

    The fit window |z| <= l/4 depends on l itself, so the slope at the
    origin seeds an iterative refit.
    """
    if initial_l is None:
        dz = 1e-3
        probe = cos_2phi_at(profile, np.array([-dz, 0.0, dz]), t, params)
        slope = (probe[2] - probe[0]) / (2.0 * dz)
        if slope >= 0.0:
            raise ValueError("profile has no restoring intensity gradient at z=0")
        l_fit = -1.0 / slope
    else:
        l_fit = initial_l
    for _ in range(n_iter):
        z = np.linspace(-l_fit / 4.0, l_fit / 4.0, n_samples)
        values = cos_2phi_at(profile, z, t, params)
        slope = float(np.dot(z, values) / np.dot(z, z))
        if slope >= 0.0:
            raise ValueError("fitted slope is non-negative; no trap at z=0")
        l_fit = -1.0 / slope
    return l_fit
