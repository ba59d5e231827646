"""Electric and magnetic response of the dense vapor to the probe field.

Coherences rho12 and rho24 give the microscopic polarizabilities. The
Clausius-Mossotti local-field relations turn those into the relative
permittivity and permeability, and from there into the refractive index.

Units: the solver works in units of gamma; the polarizability functions are
the only place where Rabi frequencies are converted to 1/s (omega1 *
gamma_scale). Polarizabilities are volumes in m^3, so N * gamma_e and
N * gamma_m are dimensionless. For the magnetic one,
mu_0 [T m/A] * mu42 [A m^2] * c [m/s] / E_p [V/m] has units m^3 because
T = V s / m^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import LocalFieldPole, ValidationError, ZeroProbe
from .lindblad import SystemParams
from .steady_state import steady_state_linear

# CODATA 2018, SI units
EPSILON_0 = 8.8541878128e-12  # F/m
MU_0 = 1.25663706212e-6  # N/A^2
SPEED_OF_LIGHT = 299792458.0  # m/s
HBAR = 1.054571817e-34  # J s
BOHR_MAGNETON = 9.2740100783e-24  # J/T

POLE_TOL = 1e-14

Branch = Literal["paper", "physical"]
BRANCHES: tuple[str, ...] = ("paper", "physical")


@dataclass(frozen=True)
class MediumParams:
    """Atomic density (1/m^3) and transition moments (C m, J/T)."""

    density_n: float = 0.25e24
    d21: float = 2.0e-29
    mu42: float = BOHR_MAGNETON

    def __post_init__(self):
        for name in ("density_n", "d21", "mu42"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class MediumResponse:
    delta1: float
    gamma_e: complex
    gamma_m: complex
    chi_e: complex
    eps_r: complex
    mu_r: complex
    n: complex

    @property
    def absorbing(self) -> bool:
        return self.n.imag > 0

    @property
    def amplifying(self) -> bool:
        return self.n.imag < 0


def _probe_rate(omega1: float, gamma_scale: float) -> float:
    if omega1 == 0:
        raise ZeroProbe("probe Rabi frequency omega1 is zero; polarizability is undefined")
    return omega1 * gamma_scale


def electric_polarizability(rho12, omega1: float, medium: MediumParams, gamma_scale: float):
    """2 d21^2 rho12 / (eps0 hbar Omega_p), with Omega_p = omega1 * gamma_scale."""
    omega_p = _probe_rate(omega1, gamma_scale)
    return 2.0 * medium.d21**2 * rho12 / (EPSILON_0 * HBAR * omega_p)


def magnetic_polarizability(rho24, omega1: float, medium: MediumParams, gamma_scale: float):
    """2 mu0 mu42 rho24 / B_p with B_p = E_p / c and E_p = hbar Omega_p / d21."""
    omega_p = _probe_rate(omega1, gamma_scale)
    probe_field = HBAR * omega_p / medium.d21
    return 2.0 * MU_0 * medium.mu42 * rho24 * SPEED_OF_LIGHT / probe_field


def _check_pole(denominator, what: str):
    mag = np.abs(denominator)
    if np.any(mag <= POLE_TOL):
        raise LocalFieldPole(f"{what}: local-field denominator |1 - N gamma/3| = {np.min(mag):.3e}")


def susceptibility_e(gamma_e, density_n: float):
    """Local-field corrected electric susceptibility N g / (1 - N g / 3)."""
    x = density_n * np.asarray(gamma_e)
    denominator = 1.0 - x / 3.0
    _check_pole(denominator, "electric susceptibility")
    return x / denominator


def permeability(gamma_m, density_n: float):
    """(1 + 2 N g / 3) / (1 - N g / 3)."""
    x = density_n * np.asarray(gamma_m)
    denominator = 1.0 - x / 3.0
    _check_pole(denominator, "permeability")
    return (1.0 + 2.0 * x / 3.0) / denominator


def magnetic_polarizability_from_permeability(mu_r, density_n: float):
    """Inverse of ``permeability``: (mu_r - 1) / (2/3 + mu_r/3) / N."""
    return (mu_r - 1.0) / (2.0 / 3.0 + mu_r / 3.0) / density_n


def refractive_index(eps_r, mu_r, branch: Branch = "paper"):
    """Refractive index from the principal root s of eps_r * mu_r.

    ``paper`` returns -s everywhere. ``physical`` returns -s only where both
    real parts are negative and +s elsewhere. Im(n) > 0 means absorption,
    Im(n) < 0 gain.
    """
    if branch not in BRANCHES:
        raise ValidationError(f"branch must be one of {BRANCHES}, got {branch!r}")
    if np.ndim(eps_r) or np.ndim(mu_r):
        eps_r = np.asarray(eps_r, dtype=complex)
        mu_r = np.asarray(mu_r, dtype=complex)
        s = np.sqrt(eps_r * mu_r)
        if branch == "paper":
            return -s
        return np.where((eps_r.real < 0) & (mu_r.real < 0), -s, s)
    s = cmath.sqrt(complex(eps_r) * complex(mu_r))
    if branch == "paper":
        return -s
    return -s if (eps_r.real < 0 and mu_r.real < 0) else s


def response_from_coherences(
    rho12: complex,
    rho24: complex,
    delta1: float,
    omega1: float,
    medium: MediumParams,
    gamma_scale: float,
    branch: Branch = "paper",
) -> MediumResponse:
    gamma_e = complex(electric_polarizability(rho12, omega1, medium, gamma_scale))
    gamma_m = complex(magnetic_polarizability(rho24, omega1, medium, gamma_scale))
    chi_e = complex(susceptibility_e(gamma_e, medium.density_n))
    eps_r = 1.0 + chi_e
    mu_r = complex(permeability(gamma_m, medium.density_n))
    n = complex(refractive_index(eps_r, mu_r, branch))
    return MediumResponse(float(delta1), gamma_e, gamma_m, chi_e, eps_r, mu_r, n)


def respond(params: SystemParams, medium: MediumParams, branch: Branch = "paper") -> MediumResponse:
    """Steady-state solve followed by the full response chain at params.delta1."""
    steady = steady_state_linear(params)
    return response_from_coherences(
        steady.rho12,
        steady.rho24,
        params.delta1,
        params.omega1,
        medium,
        params.gamma_scale,
        branch,
    )
