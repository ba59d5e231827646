"""Steady state of the four-level master equation.

Two independent routes:

* ``steady_state_linear`` assembles the 16x16 Liouvillian from ``rhs``,
  swaps the rho22 row for the trace condition and solves it directly.
* ``steady_state_integrate`` runs fixed-step classical RK4 in time until the
  state stops changing. It is the validation oracle for the direct solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import NotConverged, SingularLiouvillian, SingularMatrixError, UnstableStep
from .lindblad import LEVELS, SystemParams, check_density_matrix, pure_state, rhs
from .linalg import condition_estimate, solve_pivoted

DIM = LEVELS * LEVELS
# vec(rho) is row-major: rho_ij sits at index 4*i + j
TRACE_ROW = 1 * LEVELS + 1
DIAGONAL = [i * LEVELS + i for i in range(LEVELS)]
DEFAULT_RESIDUAL_TOL = 1e-10

Method = Literal["linear-solve", "time-integration"]


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    residual: float
    method: Method
    converged: bool = True
    elapsed: float | None = None
    max_trace_deviation: float = 0.0
    population_range: tuple[float, float] = field(default=(0.0, 1.0))

    @property
    def rho12(self) -> complex:
        return complex(self.rho[0, 1])

    @property
    def rho24(self) -> complex:
        return complex(self.rho[1, 3])


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings, times in units of 1/gamma.

    ``step=None`` picks a stability-limited step from the parameters (see
    ``default_step``). For accurate transients rather than just the final
    state, a step of at most 0.01/max(omega3, omega1, |delta1|, 1) is the
    safe choice.
    """

    step: float | None = None
    horizon: float = 2e4
    convergence_tol: float = 1e-12

    def __post_init__(self):
        if self.step is not None and not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"step must be > 0, got {self.step!r}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon!r}")
        if self.step is not None and self.step >= self.horizon:
            raise ValueError("step must be smaller than horizon")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be > 0")


def liouvillian(params: SystemParams) -> np.ndarray:
    """Matrix of the linear map rho -> rhs(rho) acting on row-major vec(rho)."""
    basis = np.eye(DIM, dtype=complex).reshape(DIM, LEVELS, LEVELS)
    return rhs(basis, params).reshape(DIM, DIM).T


def constrained_system(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Liouvillian with the rho22 row replaced by sum(rho_ii) = 1."""
    m = liouvillian(params)
    b = np.zeros(DIM, dtype=complex)
    m[TRACE_ROW, :] = 0.0
    m[TRACE_ROW, DIAGONAL] = 1.0
    b[TRACE_ROW] = 1.0
    return m, b


def _finish(rho: np.ndarray, params: SystemParams) -> tuple[np.ndarray, float]:
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(np.max(np.abs(rhs(rho, params))))
    return rho, residual


def steady_state_linear(
    params: SystemParams, residual_tol: float = DEFAULT_RESIDUAL_TOL
) -> SteadyStateResult:
    m, b = constrained_system(params)
    try:
        x = solve_pivoted(m, b)
    except SingularMatrixError as exc:
        raise SingularLiouvillian(
            f"constrained Liouvillian is rank deficient: {exc}", float(condition_estimate(m))
        ) from exc
    return _accept(x.reshape(LEVELS, LEVELS), params, residual_tol, m)


def _accept(rho, params, residual_tol, m) -> SteadyStateResult:
    rho, residual = _finish(rho, params)
    if not residual <= residual_tol:
        raise SingularLiouvillian(
            f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e}",
            float(condition_estimate(m)),
        )
    pops = rho.diagonal().real
    return SteadyStateResult(
        rho=rho,
        residual=residual,
        method="linear-solve",
        max_trace_deviation=abs(float(pops.sum()) - 1.0),
        population_range=(float(pops.min()), float(pops.max())),
    )


def steady_states_linear(params_list, residual_tol: float = DEFAULT_RESIDUAL_TOL):
    """Batched ``steady_state_linear``.

    Returns one entry per parameter set: a SteadyStateResult, or the
    LhmError raised for that point. A failure at one point does not affect
    the others.
    """
    params_list = list(params_list)
    if not params_list:
        return []
    systems = [constrained_system(p) for p in params_list]
    m = np.stack([s[0] for s in systems])
    b = np.stack([s[1] for s in systems])
    try:
        x = solve_pivoted(m, b)
    except SingularMatrixError:
        return [_safe_linear(p, residual_tol) for p in params_list]
    out = []
    for i, p in enumerate(params_list):
        try:
            out.append(_accept(x[i].reshape(LEVELS, LEVELS), p, residual_tol, m[i]))
        except SingularLiouvillian as exc:
            out.append(exc)
    return out


def _safe_linear(params, residual_tol):
    try:
        return steady_state_linear(params, residual_tol)
    except SingularLiouvillian as exc:
        return exc


def default_step(params: SystemParams) -> float:
    """Step well inside RK4's stability region for this Liouvillian.

    The bound on the spectral radius is the sum of detunings, twice the
    Rabi frequencies and the decay rates; h * bound <= 1 keeps every
    eigenvalue's h*lambda inside the region (imaginary-axis limit 2.83).
    """
    bound = (
        abs(params.delta1)
        + abs(params.delta2)
        + abs(params.delta4)
        + 2.0 * (params.omega1 + params.omega2 + params.omega3)
        + 2.0 * (params.gamma1 + params.gamma2 + params.gamma4)
    )
    return min(0.05, 1.0 / max(bound, 1.0))


def rk4_step(rho: np.ndarray, params: SystemParams, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of size ``h``."""
    k1 = rhs(rho, params)
    k2 = rhs(rho + 0.5 * h * k1, params)
    k3 = rhs(rho + 0.5 * h * k2, params)
    k4 = rhs(rho + h * k3, params)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step_matrix(params: SystemParams, h: float) -> np.ndarray:
    """The RK4 step as a 16x16 matrix on vec(rho).

    The equations are linear and autonomous, so one step is a fixed linear
    map; applying its m-th power is the same as taking m steps.
    """
    basis = np.eye(DIM, dtype=complex).reshape(DIM, LEVELS, LEVELS)
    return rk4_step(basis, params, h).reshape(DIM, DIM).T


def _trace_preserving(p: np.ndarray) -> np.ndarray:
    """Remove the rounding that makes a propagator leak trace.

    The exact RK4 map conserves the trace, i.e. the diagonal rows of ``p``
    sum to the trace functional. Forming the matrix power breaks this at
    the 1e-15 level, which compounds over ~1e5 windows; the defect is
    spread evenly over the four diagonal rows.
    """
    p = p.copy()
    target = np.zeros(DIM)
    target[DIAGONAL] = 1.0
    defect = p[DIAGONAL].sum(axis=0) - target
    p[DIAGONAL] -= defect / LEVELS
    return p


def steady_state_integrate(
    params: SystemParams,
    init: np.ndarray | None = None,
    cfg: IntegratorConfig | None = None,
) -> SteadyStateResult:
    """Integrate to steady state with fixed-step RK4.

    The state is sampled after every window of ceil(1/h) steps (about one
    unit of time); convergence is declared once the max-abs change per
    unit time over a window falls below ``cfg.convergence_tol``.

    Raises NotConverged (carrying the last state) if the horizon is reached
    first, and UnstableStep if the trace drifts by more than 1e-9 or any
    element exceeds 10 in modulus.
    """
    cfg = cfg or IntegratorConfig()
    rho = check_density_matrix(pure_state(3) if init is None else init).copy()
    h = cfg.step if cfg.step is not None else default_step(params)
    steps_per_window = max(1, math.ceil(1.0 / h))
    steps_per_window = min(steps_per_window, max(1, int(cfg.horizon / h)))
    window = steps_per_window * h
    propagator = _trace_preserving(np.linalg.matrix_power(rk4_step_matrix(params, h), steps_per_window))

    vec = rho.reshape(DIM)
    t = 0.0
    max_trace_dev = 0.0
    pop_lo, pop_hi = float(np.min(rho.diagonal().real)), float(np.max(rho.diagonal().real))
    converged = False
    while t < cfg.horizon:
        new = propagator @ vec
        t += window
        pops = new[DIAGONAL].real
        trace_dev = abs(float(np.sum(new[DIAGONAL]).real) - 1.0)
        max_trace_dev = max(max_trace_dev, trace_dev)
        pop_lo = min(pop_lo, float(pops.min()))
        pop_hi = max(pop_hi, float(pops.max()))
        biggest = float(np.max(np.abs(new)))
        if not math.isfinite(biggest) or biggest > 10.0 or trace_dev > 1e-9:
            raise UnstableStep(
                f"state diverged at t = {t:.4g}/gamma with step {h:.3g} "
                f"(max |rho_ij| = {biggest:.3e}, trace drift {trace_dev:.3e})"
            )
        change = float(np.max(np.abs(new - vec))) / window
        vec = new
        if change < cfg.convergence_tol:
            converged = True
            break

    rho, residual = _finish(vec.reshape(LEVELS, LEVELS), params)
    result = SteadyStateResult(
        rho=rho,
        residual=residual,
        method="time-integration",
        converged=converged,
        elapsed=t,
        max_trace_deviation=max_trace_dev,
        population_range=(pop_lo, pop_hi),
    )
    if not converged:
        raise NotConverged(
            f"no convergence to {cfg.convergence_tol:.1e}/gamma within horizon "
            f"{cfg.horizon:.4g}/gamma (residual {residual:.3e})",
            result,
        )
    return result
