"""Invariant checks used by ``lhm-sim validate`` and the test-suite.

``published_element_equations`` transcribes the nine element equations as
they appear in print, letter for letter, so that the Lindblad RHS can be
cross-checked against them. Two of them are misprinted; the corrected terms
are listed in ``KNOWN_MISPRINTS``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .lindblad import SystemParams, rhs
from .response import MediumParams, magnetic_polarizability_from_permeability, permeability
from .steady_state import IntegratorConfig, steady_state_integrate, steady_state_linear

# (row, col) 0-based -> label
ELEMENTS = {
    "rho11": (0, 0),
    "rho33": (2, 2),
    "rho44": (3, 3),
    "rho12": (0, 1),
    "rho13": (0, 2),
    "rho14": (0, 3),
    "rho23": (1, 2),
    "rho24": (1, 3),
    "rho34": (2, 3),
}

KNOWN_MISPRINTS = {
    "rho44": "printed -(i W3 rho41 e^{-i phi3} + H.c.); trace conservation requires e^{+i phi3}",
    "rho14": "printed -(g1 + g4 - i d1) rho14; the Hamiltonian gives -(g1 + g4 + i d1) rho14",
}
NOTATION_ONLY = {
    "rho12": 'printed "Omega{3}" read as omega3; numerically identical',
}


def published_element_equations(rho: np.ndarray, p: SystemParams, corrected: bool = False) -> dict:
    """The nine printed element equations evaluated as scalar expressions.

    With ``corrected=True`` the two misprinted terms are replaced by their
    derived forms. Detuning delta4 does not appear in print and is ignored.
    """
    r = lambda i, j: complex(rho[i - 1, j - 1])  # noqa: E731
    w1, w2, w3 = p.omega1, p.omega2, p.omega3
    d1, d2 = p.delta1, p.delta2
    g1, g2, g4 = p.gamma1, p.gamma2, p.gamma4
    e = cmath.exp(1j * p.phi3)
    ec = cmath.exp(-1j * p.phi3)

    def hc(z):
        return z + z.conjugate()

    out = {}
    out["rho11"] = -2 * g1 * r(1, 1) - hc(1j * w1 * r(1, 2) + 1j * w3 * r(1, 4) * ec)
    out["rho33"] = 2 * g2 * r(2, 2) + hc(1j * w2 * r(2, 3))
    rho44_phase = e if corrected else ec
    out["rho44"] = -2 * g4 * r(4, 4) - hc(1j * w3 * r(4, 1) * rho44_phase)
    out["rho12"] = (
        -(g1 + g2 + 1j * d1) * r(1, 2)
        - 1j * w1 * r(1, 1)
        - 1j * w2 * r(1, 3)
        + 1j * w1 * r(2, 2)
        + 1j * w3 * r(4, 2) * e
    )
    out["rho13"] = (
        -(g1 + 1j * d1 + 1j * d2) * r(1, 3)
        - 1j * w2 * r(1, 2)
        + 1j * w1 * r(2, 3)
        + 1j * w3 * r(4, 3) * e
    )
    rho14_detuning = 1j * d1 if corrected else -1j * d1
    out["rho14"] = (
        -(g1 + g4 + rho14_detuning) * r(1, 4)
        + 1j * w1 * r(2, 4)
        - 1j * w3 * (r(1, 1) - r(4, 4)) * e
    )
    out["rho23"] = (
        -(g2 + 1j * d2) * r(2, 3) + 1j * w1 * r(1, 3) - 1j * w2 * r(2, 2) + 1j * w2 * r(3, 3)
    )
    out["rho24"] = (
        -(g2 + g4) * r(2, 4) + 1j * w1 * r(1, 4) + 1j * w2 * r(3, 4) - 1j * w3 * r(2, 1) * e
    )
    out["rho34"] = -(g4 - 1j * d2) * r(3, 4) + 1j * w2 * r(2, 4) - 1j * w3 * r(3, 1) * e
    return out


def random_density_matrix(rng: np.random.Generator, size: int = 4) -> np.ndarray:
    """Random mixed state: G G^dagger normalised to unit trace."""
    g = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def random_params(rng: np.random.Generator, fast_decay: bool = False) -> SystemParams:
    """Parameters drawn from the regime of the figures (Rabi <= 5, |delta1| <= 150)."""
    lo, hi = (0.05, 0.5) if fast_decay else (0.001, 0.01)
    return SystemParams(
        omega1=rng.uniform(0.1, 5.0),
        omega2=rng.uniform(0.0, 5.0),
        omega3=rng.uniform(0.0, 5.0),
        phi3=rng.uniform(0.0, 2 * math.pi),
        delta1=rng.uniform(-150.0, 150.0),
        delta2=rng.uniform(-1.0, 1.0),
        gamma1=rng.uniform(lo, hi),
        gamma2=rng.uniform(lo, hi),
        gamma4=rng.uniform(lo, hi),
    )


def fig2_params(delta1: float = 0.0) -> SystemParams:
    return SystemParams(
        omega1=0.8, omega2=0.12, omega3=2.8, phi3=math.pi / 3, delta1=delta1,
        delta2=0.001, gamma1=0.001, gamma2=0.005, gamma4=0.001,
    )


def fig3_params(delta1: float = 0.0) -> SystemParams:
    return SystemParams(
        omega1=0.8, omega2=0.12, omega3=3.8, phi3=4 * math.pi / 3, delta1=delta1,
        delta2=0.001, gamma1=0.001, gamma2=0.005, gamma4=0.001,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_trace_and_hermiticity(states: int = 1000, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    p = fig2_params(20.0)
    worst_trace = worst_herm = 0.0
    for _ in range(states):
        rho = random_density_matrix(rng)
        d = rhs(rho, p)
        scale = np.max(np.abs(rho))
        worst_trace = max(worst_trace, abs(np.trace(d)) / scale)
        worst_herm = max(worst_herm, float(np.max(np.abs(d - d.conj().T))))
    ok = worst_trace <= 1e-13 and worst_herm <= 1e-13
    return CheckResult(
        "rhs trace and Hermiticity",
        ok,
        f"{states} states, max |tr| {worst_trace:.2e}, max herm dev {worst_herm:.2e} (tol 1e-13)",
    )


def check_phase_periodicity(seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        p = random_params(rng)
        q = replace(p, phi3=p.phi3 + 2 * math.pi)
        rho = random_density_matrix(rng)
        worst = max(worst, float(np.max(np.abs(rhs(rho, p) - rhs(rho, q)))))
    return CheckResult("phi3 periodicity", worst <= 1e-13, f"max diff {worst:.2e} (tol 1e-13)")


def check_published_equations(states: int = 100, seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ELEMENTS}
    worst_corrected = {k: 0.0 for k in ELEMENTS}
    for _ in range(states):
        p = random_params(rng)
        rho = random_density_matrix(rng)
        d = rhs(rho, p)
        printed = published_element_equations(rho, p)
        fixed = published_element_equations(rho, p, corrected=True)
        for k, (i, j) in ELEMENTS.items():
            worst[k] = max(worst[k], abs(d[i, j] - printed[k]))
            worst_corrected[k] = max(worst_corrected[k], abs(d[i, j] - fixed[k]))
    tol = 1e-12
    agree = {k for k, v in worst.items() if v <= tol}
    ok = (
        agree == set(ELEMENTS) - set(KNOWN_MISPRINTS)
        and all(v <= tol for v in worst_corrected.values())
    )
    return CheckResult(
        "published element equations",
        ok,
        f"{len(agree)}/9 agree as printed; misprints at {', '.join(sorted(KNOWN_MISPRINTS))}",
    )


def check_no_drive_fixed_point() -> CheckResult:
    p = SystemParams(0, 0, 0, 0, 0, 0, 0.001, 0.005, 0.001)
    lin = steady_state_linear(p).rho
    cfg = IntegratorConfig(horizon=1e5, convergence_tol=1e-15)
    num = steady_state_integrate(p, np.diag([1.0, 0, 0, 0]).astype(complex), cfg).rho
    err = max(abs(lin[2, 2] - 1), abs(num[2, 2] - 1))
    return CheckResult("no-drive fixed point", err <= 1e-12, f"|rho33 - 1| <= {err:.2e} (tol 1e-12)")


def check_oracle_equivalence(detunings=(-100.0, -20.0, 5.0, 60.0)) -> CheckResult:
    worst = 0.0
    for d in detunings:
        p = fig2_params(d)
        a = steady_state_linear(p).rho
        b = steady_state_integrate(p).rho
        worst = max(worst, float(np.max(np.abs(a - b))))
    return CheckResult(
        "linear solve vs RK4", worst <= 1e-7, f"{len(detunings)} detunings, max diff {worst:.2e}"
    )


def check_clausius_mossotti_roundtrip(samples: int = 1000, seed: int = 4) -> CheckResult:
    rng = np.random.default_rng(seed)
    medium = MediumParams()
    worst = 0.0
    checked = 0
    while checked < samples:
        x = complex(rng.uniform(-20, 20), rng.uniform(-20, 20))
        if abs(1 - x / 3) < 0.1 or abs(x) < 1e-3:
            continue
        gm = x / medium.density_n
        back = magnetic_polarizability_from_permeability(permeability(gm, medium.density_n), medium.density_n)
        worst = max(worst, abs(back - gm) / abs(gm))
        checked += 1
    return CheckResult("Clausius-Mossotti roundtrip", worst <= 1e-12, f"max rel err {worst:.2e}")


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_trace_and_hermiticity,
    check_phase_periodicity,
    check_published_equations,
    check_no_drive_fixed_point,
    check_oracle_equivalence,
    check_clausius_mossotti_roundtrip,
)


def run_all() -> list[CheckResult]:
    results = []
    for check in CHECKS:
        try:
            results.append(check())
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(check.__name__, False, f"{type(exc).__name__}: {exc}"))
    return results
