"""Four-level Y-type atom: parameters, Hamiltonian and master-equation RHS.

Levels are numbered 1..4 in docs and messages and stored 0-based. Level 2
couples up to the near-degenerate pair |1>, |4> (probe on 1-2, coupling on
1-4) and down to the terminal state |3> (signal on 2-3). All frequencies and
rates are in units of the scale rate gamma, with hbar = 1.

Decay channels (physical rates are twice the stored half rates):

    |1> -> |2>  rate 2*gamma1
    |4> -> |2>  rate 2*gamma4
    |2> -> |3>  rate 2*gamma2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

LEVELS = 4
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POPULATION_SLACK = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Drive, detuning and decay parameters, all in units of gamma.

    ``phi3`` is the phase of the complex coupling Rabi frequency
    ``omega3 * exp(1j * phi3)``; ``gamma_scale`` is gamma in 1/s.
    """

    omega1: float
    omega2: float
    omega3: float
    phi3: float
    delta1: float
    delta2: float
    gamma1: float
    gamma2: float
    gamma4: float
    delta4: float = 0.0
    gamma_scale: float = 1e6

    def __post_init__(self):
        for name in ("omega1", "omega2", "omega3"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {value!r}")
        for name in ("gamma1", "gamma2", "gamma4", "gamma_scale"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} must be finite and > 0, got {value!r}")
        for name in ("phi3", "delta1", "delta2", "delta4"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value!r}")

    @property
    def coupling(self) -> complex:
        """Complex coupling Rabi frequency omega3 * exp(i phi3)."""
        return self.omega3 * complex(math.cos(self.phi3), math.sin(self.phi3))

    def with_delta1(self, delta1: float) -> "SystemParams":
        return replace(self, delta1=float(delta1))

    def scaled(self, factor: float) -> "SystemParams":
        """Multiply every rate, Rabi frequency and detuning by ``factor``."""
        return replace(
            self,
            omega1=self.omega1 * factor,
            omega2=self.omega2 * factor,
            omega3=self.omega3 * factor,
            delta1=self.delta1 * factor,
            delta2=self.delta2 * factor,
            delta4=self.delta4 * factor,
            gamma1=self.gamma1 * factor,
            gamma2=self.gamma2 * factor,
            gamma4=self.gamma4 * factor,
        )


def check_density_matrix(rho: np.ndarray) -> np.ndarray:
    """Validate a 4x4 density matrix and return it as a complex array.

    Raises ValidationError naming the violated invariant.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (LEVELS, LEVELS):
        raise ValidationError(f"density matrix must be 4x4, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"density matrix not Hermitian (max deviation {herm:.3e})")
    trace = np.trace(rho)
    if abs(trace - 1) > TRACE_TOL:
        raise ValidationError(f"density matrix trace {trace.real:.15g} differs from 1")
    pops = rho.diagonal().real
    for level, p in enumerate(pops, start=1):
        if p < -POPULATION_SLACK or p > 1 + POPULATION_SLACK:
            raise ValidationError(f"population rho{level}{level} = {p:.3e} outside [0, 1]")
    return rho


def pure_state(level: int) -> np.ndarray:
    """|level><level| with 1-based ``level``."""
    if not 1 <= level <= LEVELS:
        raise ValidationError(f"level must be in 1..4, got {level}")
    rho = np.zeros((LEVELS, LEVELS), dtype=complex)
    rho[level - 1, level - 1] = 1.0
    return rho


def build_hamiltonian(params: SystemParams) -> np.ndarray:
    """Rotating-frame Hamiltonian in units of gamma (hbar = 1).

    Diagonal (d1 + d2, d2, 0, d4 + d2); couplings h12 = -omega1,
    h23 = -omega2, h14 = -omega3 exp(i phi3), plus Hermitian conjugates.
    """
    h = np.zeros((LEVELS, LEVELS), dtype=complex)
    h[0, 0] = params.delta1 + params.delta2
    h[1, 1] = params.delta2
    h[3, 3] = params.delta4 + params.delta2
    h[0, 1] = -params.omega1
    h[1, 2] = -params.omega2
    h[0, 3] = -params.coupling
    h[1, 0] = np.conj(h[0, 1])
    h[2, 1] = np.conj(h[1, 2])
    h[3, 0] = np.conj(h[0, 3])
    return h


def decay_channels(params: SystemParams) -> tuple[tuple[float, int, int], ...]:
    """(rate, lower, upper) for each spontaneous channel, 0-based levels."""
    return (
        (2.0 * params.gamma1, 1, 0),
        (2.0 * params.gamma4, 1, 3),
        (2.0 * params.gamma2, 2, 1),
    )


def rhs(rho: np.ndarray, params: SystemParams) -> np.ndarray:
    """d(rho)/dt = -i[H, rho] + sum of Lindblad dissipators.

    ``rho`` may be a single 4x4 matrix or a stack with shape (..., 4, 4).
    The map is linear, so non-Hermitian inputs (e.g. basis matrices) are
    accepted as well.

    Compared with the published element equations, this form corrects two
    misprints: the rho44 equation carries exp(+i phi3) on rho41 (the printed
    exp(-i phi3) breaks trace conservation), and the rho14 detuning term is
    -i(delta1 - delta4) rho14 (printed with the opposite sign). The printed
    "Omega{3}" in the rho12 equation is read as omega3.
    """
    rho = np.asarray(rho, dtype=complex)
    h = build_hamiltonian(params)
    out = -1j * (h @ rho - rho @ h)
    for rate, lower, upper in decay_channels(params):
        out[..., lower, lower] += rate * rho[..., upper, upper]
        out[..., upper, :] -= 0.5 * rate * rho[..., upper, :]
        out[..., :, upper] -= 0.5 * rate * rho[..., :, upper]
    return out
