"""Probe-detuning sweeps, phase scans and feature extraction."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import AllUndefined, LhmError, ValidationError, ZeroProbe
from .lindblad import SystemParams
from .response import (
    BRANCHES,
    POLE_TOL,
    Branch,
    MediumParams,
    MediumResponse,
    electric_polarizability,
    magnetic_polarizability,
    permeability,
    refractive_index,
    respond,
    susceptibility_e,
)
from .steady_state import steady_states_linear

DEFAULT_POINTS = 3001
DEFAULT_TOL_ABS = 0.02
MAX_POINTS = 10**6
CHUNK = 256
THREADS_ENV = "LHM_SIM_THREADS"


def worker_count() -> int:
    """Concurrency bound from LHM_SIM_THREADS (unset or 0 means CPU count)."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError(f"{THREADS_ENV} must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True)
class SweepSpec:
    delta1_min: float
    delta1_max: float
    points: int
    params: SystemParams
    medium: MediumParams = field(default_factory=MediumParams)
    branch: Branch = "paper"
    max_points: int = MAX_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.delta1_min) and math.isfinite(self.delta1_max)):
            raise ValidationError("sweep limits must be finite")
        if not self.delta1_min < self.delta1_max:
            raise ValidationError(
                f"delta1_min ({self.delta1_min}) must be < delta1_max ({self.delta1_max})"
            )
        if not 2 <= self.points <= self.max_points:
            raise ValidationError(f"points must be in [2, {self.max_points}], got {self.points}")
        if self.branch not in BRANCHES:
            raise ValidationError(f"branch must be one of {BRANCHES}, got {self.branch!r}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.delta1_min, self.delta1_max, self.points)


@dataclass(frozen=True)
class UndefinedPoint:
    delta1: float
    error_kind: str


@dataclass(frozen=True, eq=False)
class ResponseCurve:
    """Response over a detuning grid, stored column-wise.

    Undefined points hold NaN in every response column and the error class
    name in ``errors``; defined points have ``errors[i] is None``. The raw
    steady-state coherences are kept so the curve can be re-evaluated for a
    different medium without solving again.
    """

    delta1: np.ndarray
    rho12: np.ndarray
    rho24: np.ndarray
    gamma_e: np.ndarray
    gamma_m: np.ndarray
    chi_e: np.ndarray
    eps_r: np.ndarray
    mu_r: np.ndarray
    n: np.ndarray
    errors: tuple
    omega1: float
    gamma_scale: float
    medium: MediumParams
    branch: Branch

    def __len__(self) -> int:
        return len(self.delta1)

    @property
    def defined(self) -> np.ndarray:
        return np.array([e is None for e in self.errors], dtype=bool)

    def point(self, i: int) -> MediumResponse | UndefinedPoint:
        if self.errors[i] is not None:
            return UndefinedPoint(float(self.delta1[i]), self.errors[i])
        return MediumResponse(
            float(self.delta1[i]),
            complex(self.gamma_e[i]),
            complex(self.gamma_m[i]),
            complex(self.chi_e[i]),
            complex(self.eps_r[i]),
            complex(self.mu_r[i]),
            complex(self.n[i]),
        )

    def __iter__(self) -> Iterator[tuple[float, MediumResponse | UndefinedPoint]]:
        for i in range(len(self)):
            yield float(self.delta1[i]), self.point(i)

    def identical_to(self, other: "ResponseCurve") -> bool:
        """Bitwise equality of every column (NaNs compare equal)."""
        cols = ("delta1", "rho12", "rho24", "gamma_e", "gamma_m", "chi_e", "eps_r", "mu_r", "n")
        return self.errors == other.errors and all(
            np.array_equal(getattr(self, c), getattr(other, c), equal_nan=True) for c in cols
        )

    def with_medium(self, medium: MediumParams, branch: Branch | None = None) -> "ResponseCurve":
        """Re-evaluate the response chain for new moments or branch."""
        solver_errors = [
            e if e not in (None, "LocalFieldPole", "ZeroProbe") else None for e in self.errors
        ]
        return _assemble(
            self.delta1,
            self.rho12,
            self.rho24,
            solver_errors,
            self.omega1,
            self.gamma_scale,
            medium,
            branch or self.branch,
        )


def _assemble(delta1, rho12, rho24, solver_errors, omega1, gamma_scale, medium, branch):
    size = len(delta1)
    nan = np.full(size, complex(np.nan, np.nan))
    cols = {k: nan.copy() for k in ("gamma_e", "gamma_m", "chi_e", "eps_r", "mu_r", "n")}
    errors = list(solver_errors)
    ok = np.array([e is None for e in errors], dtype=bool)
    if omega1 == 0:
        errors = [e or ZeroProbe.__name__ for e in errors]
        ok[:] = False
    if ok.any():
        ge = electric_polarizability(rho12[ok], omega1, medium, gamma_scale)
        gm = magnetic_polarizability(rho24[ok], omega1, medium, gamma_scale)
        den_e = np.abs(1.0 - medium.density_n * ge / 3.0)
        den_m = np.abs(1.0 - medium.density_n * gm / 3.0)
        pole = (den_e <= POLE_TOL) | (den_m <= POLE_TOL)
        idx = np.flatnonzero(ok)
        for i in idx[pole]:
            errors[i] = "LocalFieldPole"
        good = idx[~pole]
        ge, gm = ge[~pole], gm[~pole]
        chi = susceptibility_e(ge, medium.density_n)
        eps = 1.0 + chi
        mu = permeability(gm, medium.density_n)
        cols["gamma_e"][good] = ge
        cols["gamma_m"][good] = gm
        cols["chi_e"][good] = chi
        cols["eps_r"][good] = eps
        cols["mu_r"][good] = mu
        cols["n"][good] = refractive_index(eps, mu, branch)
    return ResponseCurve(
        delta1=np.asarray(delta1, dtype=float),
        rho12=rho12,
        rho24=rho24,
        errors=tuple(errors),
        omega1=omega1,
        gamma_scale=gamma_scale,
        medium=medium,
        branch=branch,
        **cols,
    )


def _solve_chunk(params: SystemParams, grid: np.ndarray):
    results = steady_states_linear([params.with_delta1(d) for d in grid])
    rho12 = np.full(len(grid), complex(np.nan, np.nan))
    rho24 = rho12.copy()
    errors = []
    for i, r in enumerate(results):
        if isinstance(r, LhmError):
            errors.append(r.kind)
        else:
            rho12[i] = r.rho12
            rho24[i] = r.rho24
            errors.append(None)
    return rho12, rho24, errors


def sweep(spec: SweepSpec, workers: int | None = None) -> ResponseCurve:
    """Evaluate the response at ``spec.points`` evenly spaced detunings.

    Chunks of the grid are solved concurrently (at most ``workers`` at a
    time, default from LHM_SIM_THREADS) and reassembled in grid order.
    Points that fail keep an error marker instead of aborting the sweep.
    """
    grid = spec.grid()
    chunks = [grid[i : i + CHUNK] for i in range(0, len(grid), CHUNK)]
    workers = worker_count() if workers is None else max(1, workers)
    if workers == 1 or len(chunks) == 1:
        parts = [_solve_chunk(spec.params, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _solve_chunk(spec.params, c), chunks))
    rho12 = np.concatenate([p[0] for p in parts])
    rho24 = np.concatenate([p[1] for p in parts])
    errors = [e for p in parts for e in p[2]]
    return _assemble(
        grid, rho12, rho24, errors, spec.params.omega1, spec.params.gamma_scale,
        spec.medium, spec.branch,
    )


def phase_scan(
    params: SystemParams,
    medium: MediumParams,
    phi3_values,
    delta1: float,
    branch: Branch = "paper",
) -> list[MediumResponse]:
    phi3_values = list(phi3_values)
    if not phi3_values:
        raise ValidationError("phase_scan needs at least one phi3 value")
    base = params.with_delta1(delta1)
    return [respond(replace(base, phi3=float(phi)), medium, branch) for phi in phi3_values]


# ---------------------------------------------------------------- features

Interval = tuple[float, float]


@dataclass(frozen=True)
class FeatureReport:
    abs_peak: tuple[float, float] | None
    zero_abs_intervals: tuple[Interval, ...]
    gain_intervals: tuple[tuple[float, float, float], ...]
    neg_eps_intervals: tuple[Interval, ...]
    neg_mu_intervals: tuple[Interval, ...]
    neg_re_n_intervals: tuple[Interval, ...]
    tol_abs: float
    sweep_range: Interval

    def to_dict(self) -> dict:
        return {
            "abs_peak": None
            if self.abs_peak is None
            else {"delta1_over_gamma": self.abs_peak[0], "im_n": self.abs_peak[1]},
            "zero_abs_intervals": [list(iv) for iv in self.zero_abs_intervals],
            "gain_intervals": [
                {"lo": lo, "hi": hi, "min_im_n": m} for lo, hi, m in self.gain_intervals
            ],
            "neg_eps_intervals": [list(iv) for iv in self.neg_eps_intervals],
            "neg_mu_intervals": [list(iv) for iv in self.neg_mu_intervals],
            "neg_re_n_intervals": [list(iv) for iv in self.neg_re_n_intervals],
            "tol_abs": self.tol_abs,
            "sweep_range": list(self.sweep_range),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeatureReport":
        peak = data["abs_peak"]

        def ivs(key):
            return tuple((float(lo), float(hi)) for lo, hi in data[key])

        return cls(
            abs_peak=None if peak is None else (float(peak["delta1_over_gamma"]), float(peak["im_n"])),
            zero_abs_intervals=ivs("zero_abs_intervals"),
            gain_intervals=tuple(
                (float(g["lo"]), float(g["hi"]), float(g["min_im_n"])) for g in data["gain_intervals"]
            ),
            neg_eps_intervals=ivs("neg_eps_intervals"),
            neg_mu_intervals=ivs("neg_mu_intervals"),
            neg_re_n_intervals=ivs("neg_re_n_intervals"),
            tol_abs=float(data["tol_abs"]),
            sweep_range=tuple(float(v) for v in data["sweep_range"]),
        )


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of True runs with at least two points."""
    out = []
    padded = np.concatenate(([False], mask, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    for start, stop in zip(edges[::2], edges[1::2]):
        if stop - start >= 2:
            out.append((int(start), int(stop - 1)))
    return out


def _edge(x, y, inside: int, outside: int, lower: float, upper: float) -> float:
    yo = y[outside]
    if not np.isfinite(yo):
        return float(x[inside])
    threshold = upper if yo > upper else lower
    yi = y[inside]
    frac = (threshold - yi) / (yo - yi)
    return float(x[inside] + frac * (x[outside] - x[inside]))


def band_intervals(x, y, lower=-math.inf, upper=math.inf, strict=False):
    """Intervals of x where lower <= y <= upper (strict inequalities if asked).

    Runs of at least two consecutive grid points qualify. Each end is moved
    to the linearly interpolated threshold crossing toward the neighbouring
    outside point, when that point exists and is defined. NaN never counts
    as inside.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore"):
        if strict:
            mask = (y > lower) & (y < upper)
        else:
            mask = (y >= lower) & (y <= upper)
    out = []
    for s, e in _runs(mask):
        lo = _edge(x, y, s, s - 1, lower, upper) if s > 0 else float(x[s])
        hi = _edge(x, y, e, e + 1, lower, upper) if e + 1 < len(x) else float(x[e])
        out.append((lo, hi, s, e))
    return out


def extract_features(curve: ResponseCurve, tol_abs: float = DEFAULT_TOL_ABS) -> FeatureReport:
    if not tol_abs > 0:
        raise ValidationError(f"tol_abs must be > 0, got {tol_abs!r}")
    if len(curve) == 0 or not curve.defined.any():
        raise AllUndefined("curve has no defined points")
    x = curve.delta1
    im_n = curve.n.imag
    k = int(np.nanargmax(im_n))
    peak = (float(x[k]), float(im_n[k])) if im_n[k] > tol_abs else None

    zero_abs = band_intervals(x, im_n, -tol_abs, tol_abs)
    gain = band_intervals(x, im_n, upper=-tol_abs, strict=True)
    return FeatureReport(
        abs_peak=peak,
        zero_abs_intervals=tuple((lo, hi) for lo, hi, _, _ in zero_abs),
        gain_intervals=tuple(
            (lo, hi, float(np.min(im_n[s : e + 1]))) for lo, hi, s, e in gain
        ),
        neg_eps_intervals=_negative(x, curve.eps_r.real),
        neg_mu_intervals=_negative(x, curve.mu_r.real),
        neg_re_n_intervals=_negative(x, curve.n.real),
        tol_abs=float(tol_abs),
        sweep_range=(float(x[0]), float(x[-1])),
    )


def _negative(x, y):
    return tuple((lo, hi) for lo, hi, _, _ in band_intervals(x, y, upper=0.0, strict=True))


def synthetic_curve(delta1, im_n, re_eps=None, re_mu=None, re_n=None) -> ResponseCurve:
    """Curve with prescribed columns, for exercising feature extraction."""
    delta1 = np.asarray(delta1, dtype=float)
    size = len(delta1)

    def col(values, default):
        return np.full(size, default, dtype=float) if values is None else np.asarray(values, float)

    eps = col(re_eps, -1.0).astype(complex)
    mu = col(re_mu, -1.0).astype(complex)
    n = col(re_n, -1.0) + 1j * np.asarray(im_n, dtype=float)
    zeros = np.zeros(size, dtype=complex)
    errors = tuple(None if np.isfinite(v) else "Synthetic" for v in np.asarray(im_n, float))
    return ResponseCurve(
        delta1=delta1, rho12=zeros, rho24=zeros, gamma_e=zeros, gamma_m=zeros,
        chi_e=eps - 1.0, eps_r=eps, mu_r=mu, n=n, errors=errors, omega1=1.0,
        gamma_scale=1.0, medium=MediumParams(), branch="paper",
    )
