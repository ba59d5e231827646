"""CSV and JSON serialisation of curves, reports and steady states.

CSV: LF line endings, numbers as 17 significant digits, undefined sweep
points written as ``undefined`` with the error class in ``error_kind``.
JSON: keys in fixed order, floats in shortest round-trip form.
"""

from __future__ import annotations

import io
import json
import math

import numpy as np

from .calibration import CalibrationResult
from .response import MediumResponse
from .steady_state import SteadyStateResult
from .sweep import FeatureReport, ResponseCurve, UndefinedPoint

RESPONSE_COLUMNS = ("re_eps", "im_eps", "re_mu", "im_mu", "re_n", "im_n")
CURVE_HEADER = ("delta1_over_gamma",) + RESPONSE_COLUMNS + ("error_kind",)
PHASE_HEADER = ("phi3_rad", "delta1_over_gamma") + RESPONSE_COLUMNS + ("error_kind",)


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _csv(rows) -> str:
    buf = io.StringIO()
    for row in rows:
        buf.write(",".join(row))
        buf.write("\n")
    return buf.getvalue()


def _response_values(r: MediumResponse) -> list[float]:
    return [r.eps_r.real, r.eps_r.imag, r.mu_r.real, r.mu_r.imag, r.n.real, r.n.imag]


def curve_csv(curve: ResponseCurve) -> str:
    rows = [CURVE_HEADER]
    for delta1, point in curve:
        if isinstance(point, UndefinedPoint):
            rows.append([fmt(delta1)] + ["undefined"] * len(RESPONSE_COLUMNS) + [point.error_kind])
        else:
            rows.append([fmt(delta1)] + [fmt(v) for v in _response_values(point)] + [""])
    return _csv(rows)


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def curve_json(curve: ResponseCurve) -> str:
    points = []
    for delta1, point in curve:
        entry = {"delta1_over_gamma": float(delta1)}
        if isinstance(point, UndefinedPoint):
            entry.update({c: None for c in RESPONSE_COLUMNS})
            entry["error_kind"] = point.error_kind
        else:
            entry.update(zip(RESPONSE_COLUMNS, (_finite_or_none(v) for v in _response_values(point))))
            entry["error_kind"] = None
        points.append(entry)
    doc = {
        "branch": curve.branch,
        "medium": {
            "density_per_m3": curve.medium.density_n,
            "d21_c_m": curve.medium.d21,
            "mu42_j_per_t": curve.medium.mu42,
        },
        "points": points,
    }
    return json.dumps(doc, indent=1) + "\n"


def phase_scan_csv(phis, responses) -> str:
    rows = [PHASE_HEADER]
    for phi, r in zip(phis, responses):
        rows.append([fmt(phi), fmt(r.delta1)] + [fmt(v) for v in _response_values(r)] + [""])
    return _csv(rows)


def phase_scan_json(phis, responses) -> str:
    doc = [
        {"phi3_rad": float(phi), "delta1_over_gamma": r.delta1, **dict(zip(RESPONSE_COLUMNS, _response_values(r)))}
        for phi, r in zip(phis, responses)
    ]
    return json.dumps({"points": doc}, indent=1) + "\n"


def report_json(report: FeatureReport) -> str:
    return json.dumps(report.to_dict(), indent=1) + "\n"


def read_report_json(text: str) -> FeatureReport:
    return FeatureReport.from_dict(json.loads(text))


def report_csv(report: FeatureReport) -> str:
    rows = [("feature", "lo_over_gamma", "hi_over_gamma", "value")]
    if report.abs_peak is not None:
        x, y = report.abs_peak
        rows.append(("abs_peak", fmt(x), fmt(x), fmt(y)))
    for lo, hi in report.zero_abs_intervals:
        rows.append(("zero_abs", fmt(lo), fmt(hi), fmt(report.tol_abs)))
    for lo, hi, m in report.gain_intervals:
        rows.append(("gain", fmt(lo), fmt(hi), fmt(m)))
    for name, ivs in (
        ("neg_eps", report.neg_eps_intervals),
        ("neg_mu", report.neg_mu_intervals),
        ("neg_re_n", report.neg_re_n_intervals),
    ):
        for lo, hi in ivs:
            rows.append((name, fmt(lo), fmt(hi), ""))
    return _csv(rows)


def steady_text(result: SteadyStateResult, delta1: float) -> str:
    lines = [
        f"delta1_over_gamma = {fmt(delta1)}",
        f"method = {result.method}",
        f"residual = {result.residual:.3e}",
        "rho (row i, column j; real imag):",
    ]
    for row in result.rho:
        lines.append("  " + "   ".join(f"{fmt(z.real)} {fmt(z.imag)}" for z in row))
    return "\n".join(lines) + "\n"


def steady_json(result: SteadyStateResult, delta1: float) -> str:
    doc = {
        "delta1_over_gamma": float(delta1),
        "method": result.method,
        "residual": result.residual,
        "rho_real": np.real(result.rho).tolist(),
        "rho_imag": np.imag(result.rho).tolist(),
    }
    return json.dumps(doc, indent=1) + "\n"


def calibration_json(result: CalibrationResult) -> str:
    doc = {
        "d21_c_m": result.d21,
        "mu42_j_per_t": result.mu42,
        "score": result.score,
        "terms": {k: float(v) for k, v in result.terms.items()},
        "trace": list(result.trace),
        "features": result.report.to_dict(),
    }
    return json.dumps(doc, indent=1) + "\n"


def calibration_csv(result: CalibrationResult) -> str:
    rows = [("key", "value"), ("d21_c_m", fmt(result.d21)), ("mu42_j_per_t", fmt(result.mu42)),
            ("score", fmt(result.score))]
    rows += [(f"term_{k}", fmt(v)) for k, v in result.terms.items()]
    return _csv(rows)
