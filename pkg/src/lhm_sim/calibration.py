"""Fit the transition moments d21 and mu42 to target sweep features.

The steady state does not depend on the moments, so the sweep is solved once
and every candidate only re-runs the cheap response chain and feature
extraction. Search is a logarithmic grid followed by coordinate refinement
in log10 space.

Loss (weights configurable through ``LossWeights``):

    peak      |peak - target| / |target|                       (1.0)
    position  max(0, |x_peak - x_target| - window) / window     (0.5)
              (divided by the sweep width when window is 0)
    band      fraction of grid points in the target band where
              Re eps >= 0, and separately where Re mu >= 0      (0.5 each)
    flank     per side of the peak, 1 - w / flank_width where w is
              the widest zero-absorption interval on that side
              (clipped to [0, 1])                               (0.5 each)
    intervals endpoint mismatch per interval family, relative
              to the sweep width; 1 per unmatched interval      (0.5 each)
    gain      |min Im n - target| / |target| averaged over gain
              intervals, 1 if there are none                    (0.5)

A missing peak scores 1 in the peak and position terms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NoFeasiblePoint, ValidationError
from .response import MediumParams
from .sweep import (
    DEFAULT_TOL_ABS,
    FeatureReport,
    ResponseCurve,
    SweepSpec,
    extract_features,
    sweep,
    worker_count,
)


@dataclass(frozen=True)
class LossWeights:
    peak: float = 1.0
    position: float = 0.5
    band_eps: float = 0.5
    band_mu: float = 0.5
    flank: float = 0.5
    intervals: float = 0.5
    gain: float = 0.5


@dataclass(frozen=True)
class CalibrationTargets:
    peak_value: float | None = 0.65
    peak_delta1: float | None = 0.0
    peak_window: float = 5.0
    neg_band: tuple[float, float] | None = (-100.0, 100.0)
    zero_abs_flanks: bool = True
    flank_width: float = 25.0
    zero_abs_intervals: tuple | None = None
    neg_eps_intervals: tuple | None = None
    neg_mu_intervals: tuple | None = None
    gain_intervals: tuple | None = None
    gain_minimum: float | None = None
    tol_abs: float = DEFAULT_TOL_ABS
    weights: LossWeights = field(default_factory=LossWeights)

    @classmethod
    def from_report(cls, report: FeatureReport, **overrides) -> "CalibrationTargets":
        """Targets that reproduce every feature of ``report``."""
        peak = report.abs_peak
        values = dict(
            peak_value=None if peak is None else peak[1],
            peak_delta1=None if peak is None else peak[0],
            peak_window=0.0,
            neg_band=None,
            zero_abs_flanks=False,
            zero_abs_intervals=report.zero_abs_intervals,
            neg_eps_intervals=report.neg_eps_intervals,
            neg_mu_intervals=report.neg_mu_intervals,
            gain_intervals=tuple((lo, hi) for lo, hi, _ in report.gain_intervals),
            tol_abs=report.tol_abs,
        )
        values.update(overrides)
        return cls(**values)


@dataclass(frozen=True)
class SearchGrid:
    d21_range: tuple[float, float] = (2.0e-30, 2.0e-28)
    mu42_range: tuple[float, float] = (9.2740100783e-25, 9.2740100783e-23)
    points: int = 9
    max_refinements: int = 60
    min_step: float = 1e-4  # decades

    def __post_init__(self):
        for name in ("d21_range", "mu42_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise ValidationError(f"{name} must satisfy 0 < lo <= hi < inf, got {(lo, hi)}")
        if self.points < 1:
            raise ValidationError("grid points must be >= 1")

    def axis(self, which: str) -> np.ndarray:
        lo, hi = getattr(self, f"{which}_range")
        if lo == hi or self.points == 1:
            return np.array([lo])
        return np.logspace(math.log10(lo), math.log10(hi), self.points)


@dataclass(frozen=True)
class CalibrationResult:
    d21: float
    mu42: float
    score: float
    terms: dict
    report: FeatureReport
    trace: tuple[float, ...]
    grid_best: tuple[float, float, float]


def _fraction_not_negative(x, values, band) -> float:
    lo, hi = band
    sel = (x >= lo) & (x <= hi)
    if not sel.any():
        return 1.0
    v = values[sel]
    with np.errstate(invalid="ignore"):
        bad = ~(v < 0)
    return float(np.mean(bad))


def _interval_mismatch(actual, target, width) -> float:
    actual = sorted(tuple(iv[:2]) for iv in actual)
    target = sorted(tuple(iv[:2]) for iv in target)
    unmatched = abs(len(actual) - len(target))
    total = float(unmatched)
    for a, t in zip(actual, target):
        total += (abs(a[0] - t[0]) + abs(a[1] - t[1])) / width
    return total


def loss_terms(curve: ResponseCurve, report: FeatureReport, targets: CalibrationTargets) -> dict:
    x = curve.delta1
    width = float(x[-1] - x[0])
    terms = {}
    peak = report.abs_peak
    if targets.peak_value is not None:
        terms["peak"] = 1.0 if peak is None else abs(peak[1] - targets.peak_value) / abs(targets.peak_value)
    if targets.peak_delta1 is not None:
        if peak is None:
            terms["position"] = 1.0
        else:
            miss = max(0.0, abs(peak[0] - targets.peak_delta1) - targets.peak_window)
            terms["position"] = miss / (targets.peak_window if targets.peak_window > 0 else width)
    if targets.neg_band is not None:
        terms["band_eps"] = _fraction_not_negative(x, curve.eps_r.real, targets.neg_band)
        terms["band_mu"] = _fraction_not_negative(x, curve.mu_r.real, targets.neg_band)
    if targets.zero_abs_flanks:
        center = peak[0] if peak is not None else 0.0
        left = max((hi - lo for lo, hi in report.zero_abs_intervals if hi <= center), default=0.0)
        right = max((hi - lo for lo, hi in report.zero_abs_intervals if lo >= center), default=0.0)
        terms["flank"] = sum(max(0.0, 1.0 - w / targets.flank_width) for w in (left, right))
    families = {
        "zero_abs_intervals": report.zero_abs_intervals,
        "neg_eps_intervals": report.neg_eps_intervals,
        "neg_mu_intervals": report.neg_mu_intervals,
        "gain_intervals": report.gain_intervals,
    }
    for name, actual in families.items():
        target = getattr(targets, name)
        if target is not None:
            terms[name] = _interval_mismatch(actual, target, width)
    if targets.gain_minimum is not None:
        if report.gain_intervals:
            terms["gain"] = float(
                np.mean([abs(m - targets.gain_minimum) for _, _, m in report.gain_intervals])
            ) / abs(targets.gain_minimum)
        else:
            terms["gain"] = 1.0
    return terms


def weighted_loss(terms: dict, weights: LossWeights) -> float:
    interval_keys = ("zero_abs_intervals", "neg_eps_intervals", "neg_mu_intervals", "gain_intervals")
    total = 0.0
    for key, value in terms.items():
        w = weights.intervals if key in interval_keys else getattr(weights, key)
        total += w * value
    return total


def _feasible(report: FeatureReport) -> dict:
    return {
        "absorption_peak": report.abs_peak is not None,
        "negative_eps": bool(report.neg_eps_intervals),
        "negative_mu": bool(report.neg_mu_intervals),
    }


class _Evaluator:
    def __init__(self, curve: ResponseCurve, base_medium: MediumParams, targets: CalibrationTargets):
        self.curve = curve
        self.base_medium = base_medium
        self.targets = targets

    def __call__(self, d21: float, mu42: float):
        medium = MediumParams(self.base_medium.density_n, float(d21), float(mu42))
        candidate = self.curve.with_medium(medium)
        report = extract_features(candidate, self.targets.tol_abs)
        terms = loss_terms(candidate, report, self.targets)
        return weighted_loss(terms, self.targets.weights), terms, report


def calibrate_dipoles(
    targets: CalibrationTargets,
    base: SweepSpec,
    grid: SearchGrid | None = None,
    curve: ResponseCurve | None = None,
    workers: int | None = None,
) -> CalibrationResult:
    """Grid search plus coordinate refinement of (d21, mu42).

    ``curve`` may be passed to reuse an existing sweep of ``base``. Grid
    ties are broken by smallest d21, then smallest mu42. Refinement moves
    to the best strictly improving neighbour at the current step and halves
    the step otherwise, staying inside the search ranges. ``trace`` holds
    the best score after the grid stage and after every refinement pass.
    """
    grid = grid or SearchGrid()
    curve = curve if curve is not None else sweep(base, workers=workers)
    evaluate = _Evaluator(curve, base.medium, targets)

    d_axis, m_axis = grid.axis("d21"), grid.axis("mu42")
    candidates = [(d, m) for d in d_axis for m in m_axis]
    workers = worker_count() if workers is None else max(1, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(lambda c: evaluate(*c), candidates))
    else:
        scored = [evaluate(*c) for c in candidates]

    feasible_counts = {k: 0 for k in ("absorption_peak", "negative_eps", "negative_mu")}
    any_feasible = False
    best = None
    for (d, m), (score, terms, report) in zip(candidates, scored):
        flags = _feasible(report)
        for k, v in flags.items():
            feasible_counts[k] += int(v)
        if not all(flags.values()):
            continue
        any_feasible = True
        if best is None or score < best[2]:
            best = (d, m, score, terms, report)
    if not any_feasible:
        raise NoFeasiblePoint(
            "no grid point shows an absorption peak with negative Re eps and Re mu",
            {"grid_points": len(candidates), "points_meeting_target": feasible_counts},
        )

    d, m, score, terms, report = best
    grid_best = (d, m, score)
    lo_d, hi_d = (math.log10(v) for v in grid.d21_range)
    lo_m, hi_m = (math.log10(v) for v in grid.mu42_range)
    ld, lm = math.log10(d), math.log10(m)
    step = max(
        (hi_d - lo_d) / max(grid.points - 1, 1),
        (hi_m - lo_m) / max(grid.points - 1, 1),
    ) / 2.0
    trace = [score]
    for _ in range(grid.max_refinements):
        if step < grid.min_step:
            break
        moves = []
        for dd, dm in ((-step, 0.0), (step, 0.0), (0.0, -step), (0.0, step)):
            nd = min(max(ld + dd, lo_d), hi_d)
            nm = min(max(lm + dm, lo_m), hi_m)
            if (nd, nm) != (ld, lm):
                moves.append((nd, nm))
        improved = None
        for nd, nm in moves:
            s, t, r = evaluate(10.0**nd, 10.0**nm)
            if not all(_feasible(r).values()):
                continue
            if s < score and (improved is None or s < improved[2]):
                improved = (nd, nm, s, t, r)
        if improved is None:
            step /= 2.0
        else:
            ld, lm, score, terms, report = improved
        trace.append(score)

    d_fit = d if ld == math.log10(d) else 10.0**ld
    m_fit = m if lm == math.log10(m) else 10.0**lm
    return CalibrationResult(
        d21=float(d_fit),
        mu42=float(m_fit),
        score=float(score),
        terms=terms,
        report=report,
        trace=tuple(trace),
        grid_best=grid_best,
    )
