"""Frequency-domain susceptibilities of the standing-wave coherence grating.

Three routes to the 2x2 response chi_{sigma sigma'} relating the probe
polarization components to the field components:

* ``single-beam-EIT``: the local EIT susceptibility evaluated with the total
  control intensity (no grating structure).
* ``coupled-mode``: Fourier components of the spatially varying EIT
  susceptibility assembled into self (chi_0) and cross (chi_{-/+2}) terms.
* ``truncated``: the coherence-grating ladder P_{+-1..+-(2n+1)},
  S_{0,+-2..+-2n} solved as a banded linear system; truncation order 0
  reproduces the secular two-component response exactly, and the large-order
  limit approaches the coupled-mode result.

Frequencies follow the convention Gamma = gamma - i omega,
Gamma_0 = gamma_0 - i omega.  Values are reported in units where the overall
constant 2 g_p^2/(gamma omega_ab) equals ``scale`` (default 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_banded

from .params import PhysicalParams

__all__ = [
    "GratingTruncation",
    "SpectrumResult",
    "PoleError",
    "eit_chi",
    "chi_fourier_components",
    "coupled_mode_chi",
    "closed_form_secular_chi",
    "multi_component_chi",
    "spectrum_scan",
    "SCAN_METHODS",
]

SCAN_METHODS = ("truncated", "coupled-mode", "single-beam-EIT")


class PoleError(ZeroDivisionError):
    """The response diverges at this frequency (zero-damping pole)."""


@dataclass(frozen=True)
class GratingTruncation:
    """Keep polarization harmonics up to P_{+-(2*order+1)} and spin harmonics
    up to S_{+-2*order}."""

    order: int

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ValueError("truncation order must be non-negative")


@dataclass(frozen=True)
class SpectrumResult:
    """Sampled 2x2 susceptibility matrices with their method tag."""

    omegas: np.ndarray
    chi: np.ndarray  # shape (n_samples, 2, 2)
    method: str
    truncation: int | None = None

    def __post_init__(self) -> None:
        if self.chi.shape != (len(self.omegas), 2, 2):
            raise ValueError("chi must have shape (n_samples, 2, 2)")
        if self.method not in SCAN_METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        nmax = "" if self.truncation is None else str(self.truncation)
        lines = ["omega,re_pp,im_pp,re_pm,im_pm,re_mp,im_mp,re_mm,im_mm,method,nmax"]
        for w, m in zip(self.omegas, self.chi):
            numbers = [
                w,
                m[0, 0].real, m[0, 0].imag,
                m[0, 1].real, m[0, 1].imag,
                m[1, 0].real, m[1, 0].imag,
                m[1, 1].real, m[1, 1].imag,
            ]
            lines.append(",".join([repr(float(v)) for v in numbers] + [self.method, nmax]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path


def _gammas(omega: float, params: PhysicalParams) -> tuple[complex, complex]:
    return params.gamma - 1j * omega, params.gamma0 - 1j * omega


def eit_chi(
    omega: float,
    omega_sq_total: float,
    params: PhysicalParams,
    scale: float = 1.0,
) -> complex:
    """Local EIT susceptibility i gamma Gamma_0 / (Gamma Gamma_0 + |Omega|^2).

    The prefactor 2 g_p^2/(gamma omega_ab) is folded into ``scale``.
    """
    gam, gam0 = _gammas(omega, params)
    den = gam * gam0 + omega_sq_total
    num = 1j * params.gamma * gam0
    if den == 0.0:
        if num == 0.0:
            return 0.0 + 0.0j  # removable: numerator vanishes identically
        raise PoleError(f"EIT susceptibility pole at omega={omega}")
    return scale * num / den


def _chi_of_z(
    omega: float,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    kz: np.ndarray,
    scale: float,
) -> np.ndarray:
    control = omega_plus * np.exp(1j * kz) + omega_minus * np.exp(-1j * kz)
    intensity = np.abs(control) ** 2
    gam, gam0 = _gammas(omega, params)
    den = gam * gam0 + intensity
    num = 1j * params.gamma * gam0
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = scale * num / den
    bad = ~np.isfinite(chi)
    if np.any(bad):
        if num == 0.0:
            chi = np.where(bad, 0.0, chi)  # removable 0/0 at grating nodes
        else:
            raise PoleError(f"standing-wave susceptibility pole at omega={omega}")
    return chi


def chi_fourier_components(
    omega: float,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    n: int,
    n_quad: int = 2048,
    scale: float = 1.0,
) -> complex:
    """Harmonic chi_n of chi(z, omega) over one full grating period.

    Only even n survive because the standing-wave intensity contains only
    even harmonics of k_c z.  Convergence of the periodic trapezoid rule is
    checked by comparing against a refined grid.
    """
    kz = 2.0 * np.pi * np.arange(n_quad) / n_quad
    chi = _chi_of_z(omega, omega_plus, omega_minus, params, kz, scale)
    coarse = np.mean(chi * np.exp(-1j * n * kz))
    kz2 = 2.0 * np.pi * np.arange(2 * n_quad) / (2 * n_quad)
    chi2 = _chi_of_z(omega, omega_plus, omega_minus, params, kz2, scale)
    fine = np.mean(chi2 * np.exp(-1j * n * kz2))
    tol = 1e-8 * (abs(fine) + 1e-12) + 1e-10
    if abs(fine - coarse) > max(tol, 1e-6 * abs(fine)):
        raise RuntimeError(
            f"quadrature for chi_{n} has not converged at {n_quad} points "
            f"(delta {abs(fine - coarse):.3g}); increase n_quad"
        )
    return complex(fine)


def coupled_mode_chi(
    omega: float,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    n_quad: int = 2048,
    scale: float = 1.0,
) -> np.ndarray:
    """2x2 response from the mode decomposition of the grating susceptibility.

    Self terms are chi_0, cross terms chi_{-/+2}: the polarization harmonic
    co-rotating with E_{+-} picks up chi_0 E_{+-} + chi_{+-2} E_{-/+}.
    """
    kz = 2.0 * np.pi * np.arange(n_quad) / n_quad
    chi = _chi_of_z(omega, omega_plus, omega_minus, params, kz, scale)
    chi0 = np.mean(chi)
    chi_p2 = np.mean(chi * np.exp(-2j * kz))
    chi_m2 = np.mean(chi * np.exp(2j * kz))
    return np.array([[chi0, chi_p2], [chi_m2, chi0]], dtype=complex)


def closed_form_secular_chi(
    omega: float,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    scale: float = 1.0,
) -> np.ndarray:
    """Two-component (secular) response in closed form.

    Eliminating the single spin harmonic from the driven pair of polarization
    components gives, with Omega_0^2 = |Omega_+|^2 + |Omega_-|^2:

        chi_pp = i gamma (Gamma Gamma_0 + |Omega_-|^2) / (Gamma (Gamma Gamma_0 + Omega_0^2))
        chi_pm = -i gamma Omega_+ Omega_-^* / (...)   (and +<->- mirrored)

    This is the independent oracle for the truncation-order-0 ladder solve.
    """
    gam, gam0 = _gammas(omega, params)
    w_plus = abs(omega_plus) ** 2
    w_minus = abs(omega_minus) ** 2
    den = gam * (gam * gam0 + w_plus + w_minus)
    if den == 0.0:
        raise PoleError(f"secular response pole at omega={omega}")
    pref = 1j * params.gamma * scale / den
    return np.array(
        [
            [pref * (gam * gam0 + w_minus), -pref * omega_plus * np.conj(omega_minus)],
            [-pref * np.conj(omega_plus) * omega_minus, pref * (gam * gam0 + w_plus)],
        ],
        dtype=complex,
    )


def multi_component_chi(
    omega: float,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    truncation: GratingTruncation | int,
    scale: float = 1.0,
) -> np.ndarray:
    """2x2 response of the truncated coherence-grating ladder.

    Unknowns are interleaved by harmonic index m = -(2n+1) .. (2n+1): odd m
    are polarization components P_m, even m spin components S_m.  Nearest
    neighbors couple through the control amplitudes, so the frequency-domain
    system is tridiagonal and solved as a banded matrix for unit drive in
    E_+ and then E_-.
    """
    order = truncation.order if isinstance(truncation, GratingTruncation) else int(truncation)
    if order < 0:
        raise ValueError("truncation order must be non-negative")
    gam, gam0 = _gammas(omega, params)
    gp = params.coupling

    m_top = 2 * order + 1
    idx = np.arange(-m_top, m_top + 1)
    n = len(idx)
    diag = np.where(idx % 2 != 0, gam, gam0).astype(complex)
    upper = np.zeros(n, dtype=complex)  # coupling to index i+1
    lower = np.zeros(n, dtype=complex)  # coupling to index i-1
    odd = idx % 2 != 0
    # P_m rows couple -i Omega_+ S_{m-1} and -i Omega_- S_{m+1}
    lower[odd] = -1j * omega_plus
    upper[odd] = -1j * omega_minus
    # S_m rows couple -i Omega_+^* P_{m+1} and -i Omega_-^* P_{m-1}
    upper[~odd] = -1j * np.conj(omega_plus)
    lower[~odd] = -1j * np.conj(omega_minus)

    ab = np.zeros((3, n), dtype=complex)
    ab[1] = diag
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]

    i_plus = np.searchsorted(idx, 1)
    i_minus = np.searchsorted(idx, -1)
    out = np.empty((2, 2), dtype=complex)
    for col, drive_index in enumerate((i_plus, i_minus)):
        rhs = np.zeros(n, dtype=complex)
        rhs[drive_index] = 1j * gp
        try:
            sol = solve_banded((1, 1), ab, rhs)
        except np.linalg.LinAlgError as exc:
            raise PoleError(f"grating ladder singular at omega={omega}") from exc
        if not np.all(np.isfinite(sol)):
            raise PoleError(f"grating ladder singular at omega={omega}")
        out[0, col] = sol[i_plus]
        out[1, col] = sol[i_minus]
    return scale * (params.gamma / gp) * out


def spectrum_scan(
    method: str,
    omega_min: float,
    omega_max: float,
    n_samples: int,
    omega_plus: complex,
    omega_minus: complex,
    params: PhysicalParams,
    truncation: GratingTruncation | int = 5,
    scale: float = 1.0,
) -> SpectrumResult:
    """Uniform frequency scan with one of the three methods.

    Isolated poles are recorded as NaN entries instead of aborting the scan.
    """
    if method not in SCAN_METHODS:
        raise ValueError(f"method must be one of {SCAN_METHODS}, got {method!r}")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    omegas = np.linspace(omega_min, omega_max, n_samples)
    chi = np.empty((n_samples, 2, 2), dtype=complex)
    order = truncation.order if isinstance(truncation, GratingTruncation) else int(truncation)
    total_sq = abs(omega_plus) ** 2 + abs(omega_minus) ** 2
    for i, w in enumerate(omegas):
        try:
            if method == "truncated":
                chi[i] = multi_component_chi(w, omega_plus, omega_minus, params, order, scale)
            elif method == "coupled-mode":
                chi[i] = coupled_mode_chi(w, omega_plus, omega_minus, params, scale=scale)
            else:
                diag = eit_chi(w, total_sq, params, scale)
                chi[i] = np.array([[diag, 0.0], [0.0, diag]], dtype=complex)
        except PoleError:
            chi[i] = np.full((2, 2), complex("nan"))
    return SpectrumResult(
        omegas=omegas,
        chi=chi,
        method=method,
        truncation=order if method == "truncated" else None,
    )
