import math

import numpy as np
import pytest

from lhm_sim.config import load_config
from lhm_sim.errors import AllUndefined, ValidationError
from lhm_sim.response import MediumParams, respond
from lhm_sim.sweep import (
    FeatureReport,
    SweepSpec,
    UndefinedPoint,
    band_intervals,
    extract_features,
    phase_scan,
    sweep,
    synthetic_curve,
)
from lhm_sim.validation import fig2_params, fig3_params

GAUSS_EDGE = 10.0 * math.sqrt(math.log(100.0))


@pytest.fixture(scope="module")
def medium():
    return load_config("fig2.cfg").medium


@pytest.fixture(scope="module")
def fig2_curve(medium):
    return sweep(SweepSpec(-150, 150, 3001, fig2_params(), medium))


def gaussian(points=3001, width=150.0):
    x = np.linspace(-width, width, points)
    return synthetic_curve(x, np.exp(-((x / 10.0) ** 2)))


def test_two_point_sweep(medium):
    curve = sweep(SweepSpec(-10, 10, 2, fig2_params(), medium))
    assert list(curve.delta1) == [-10.0, 10.0]
    for d1, point in curve:
        assert point.delta1 == d1
        ref = respond(fig2_params(d1), medium)
        for field in ("gamma_e", "gamma_m", "eps_r", "mu_r", "n"):
            assert abs(getattr(point, field) - getattr(ref, field)) <= 1e-13 * abs(getattr(ref, field))


def test_spec_validation(medium):
    with pytest.raises(ValidationError):
        SweepSpec(1, 1, 10, fig2_params(), medium)
    with pytest.raises(ValidationError):
        SweepSpec(0, 1, 1, fig2_params(), medium)
    with pytest.raises(ValidationError):
        SweepSpec(0, 1, 10**7, fig2_params(), medium)


def test_curve_invariants(fig2_curve):
    assert len(fig2_curve) == 3001
    assert np.all(np.diff(fig2_curve.delta1) > 0)
    assert fig2_curve.defined.all()
    assert np.all(fig2_curve.n.real <= 0)
    assert np.all(fig2_curve.eps_r - 1 - fig2_curve.chi_e == 0)


def test_fig2_negative_band(fig2_curve):
    sel = np.abs(fig2_curve.delta1) <= 100
    assert np.all(fig2_curve.eps_r.real[sel] < 0)
    assert np.all(fig2_curve.mu_r.real[sel] < 0)


def test_sweep_deterministic(medium):
    spec = SweepSpec(-150, 150, 301, fig3_params(), medium)
    assert sweep(spec).identical_to(sweep(spec))


def test_sweep_thread_count_invariant(medium):
    spec = SweepSpec(-150, 150, 701, fig2_params(), medium)
    assert sweep(spec, workers=1).identical_to(sweep(spec, workers=4))


def test_thread_env(monkeypatch, medium):
    spec = SweepSpec(-150, 150, 301, fig2_params(), medium)
    monkeypatch.setenv("LHM_SIM_THREADS", "3")
    a = sweep(spec)
    monkeypatch.setenv("LHM_SIM_THREADS", "0")
    assert a.identical_to(sweep(spec))


def test_with_medium_matches_fresh_sweep(medium):
    spec = SweepSpec(-50, 50, 101, fig2_params(), MediumParams())
    swapped = sweep(spec).with_medium(medium)
    fresh = sweep(SweepSpec(-50, 50, 101, fig2_params(), medium))
    assert swapped.identical_to(fresh)


def test_zero_probe_points_are_undefined(medium):
    p = fig2_params()
    from dataclasses import replace

    curve = sweep(SweepSpec(-5, 5, 3, replace(p, omega1=0.0), medium))
    assert not curve.defined.any()
    assert all(isinstance(pt, UndefinedPoint) and pt.error_kind == "ZeroProbe" for _, pt in curve)
    with pytest.raises(AllUndefined):
        extract_features(curve)


def test_gaussian_oracle():
    curve = gaussian()
    report = extract_features(curve, 0.01)
    spacing = 0.1
    assert report.abs_peak == (0.0, 1.0)
    (lo1, hi1), (lo2, hi2) = report.zero_abs_intervals
    assert (lo1, hi2) == (-150.0, 150.0)
    assert abs(hi1 + GAUSS_EDGE) <= spacing
    assert abs(lo2 - GAUSS_EDGE) <= spacing
    assert report.gain_intervals == ()


def test_constant_zero_curve():
    x = np.linspace(-10, 10, 101)
    report = extract_features(synthetic_curve(x, np.zeros_like(x)), 0.02)
    assert report.abs_peak is None
    assert report.zero_abs_intervals == ((-10.0, 10.0),)


def test_extraction_idempotent(fig2_curve):
    assert extract_features(fig2_curve) == extract_features(fig2_curve)


def test_report_invariants(fig2_curve):
    report = extract_features(fig2_curve)
    lo, hi = report.sweep_range
    spacing = 0.1
    families = [
        report.zero_abs_intervals,
        [iv[:2] for iv in report.gain_intervals],
        report.neg_eps_intervals,
        report.neg_mu_intervals,
        report.neg_re_n_intervals,
    ]
    for ivs in families:
        for a, b in ivs:
            assert lo <= a < b <= hi
            assert b - a >= spacing * 0.999 or (a, b) == (lo, hi)
        for (a, b), (c, d) in zip(ivs, ivs[1:]):
            assert b < c


def test_grid_refinement_moves_endpoints_less_than_spacing():
    coarse = extract_features(gaussian(301), 0.01)
    fine = extract_features(gaussian(601), 0.01)
    spacing = 1.0
    assert len(coarse.zero_abs_intervals) == len(fine.zero_abs_intervals)
    for a, b in zip(coarse.zero_abs_intervals, fine.zero_abs_intervals):
        assert abs(a[0] - b[0]) < spacing and abs(a[1] - b[1]) < spacing


def test_grid_refinement_on_fig2(medium):
    coarse = extract_features(sweep(SweepSpec(-150, 150, 3001, fig2_params(), medium)))
    fine = extract_features(sweep(SweepSpec(-150, 150, 6001, fig2_params(), medium)))
    spacing = 0.1
    for name in ("zero_abs_intervals", "neg_eps_intervals", "neg_mu_intervals"):
        a_ivs, b_ivs = getattr(coarse, name), getattr(fine, name)
        assert len(a_ivs) == len(b_ivs)
        for a, b in zip(a_ivs, b_ivs):
            assert abs(a[0] - b[0]) < spacing and abs(a[1] - b[1]) < spacing


def test_symmetric_curve_gives_symmetric_intervals():
    x = np.linspace(-100, 100, 2001)
    y = 0.5 * np.exp(-((x / 8) ** 2)) - 0.1 * np.exp(-(((np.abs(x) - 60) / 5) ** 2))
    report = extract_features(synthetic_curve(x, y), 0.02)
    spacing = 0.1
    for family in (report.zero_abs_intervals, [iv[:2] for iv in report.gain_intervals]):
        for (a, b), (c, d) in zip(family, reversed(family)):
            assert abs(a + d) <= spacing and abs(b + c) <= spacing
    assert len(report.gain_intervals) == 2


def test_band_intervals_drop_single_points():
    x = np.arange(10.0)
    y = np.ones(10)
    y[4] = -1
    assert band_intervals(x, y, upper=0.0, strict=True) == []


def test_report_roundtrip(fig2_curve):
    report = extract_features(fig2_curve)
    assert FeatureReport.from_dict(report.to_dict()) == report


def test_fig2_features(fig2_curve):
    report = extract_features(fig2_curve)
    x, peak = report.abs_peak
    assert abs(x) <= 5 and peak == pytest.approx(0.65, abs=0.15)
    assert any(hi <= x for lo, hi in report.zero_abs_intervals)
    assert any(lo >= x for lo, hi in report.zero_abs_intervals)


def test_phase_scan_periodicity(medium):
    base = fig2_params()
    a, b = phase_scan(base, medium, [0.7, 0.7 + 2 * math.pi], 10.0)
    for field in ("eps_r", "mu_r", "n"):
        assert abs(getattr(a, field) - getattr(b, field)) <= 1e-12 * max(1.0, abs(getattr(a, field)))


def test_phase_scan_single_element(medium):
    p = fig3_params()
    (r,) = phase_scan(p, medium, [p.phi3], 3.0)
    assert r == respond(p.with_delta1(3.0), medium)  # same code path, so exact


def test_fig3_absorbs_more_at_resonance(medium):
    a = respond(fig2_params(0.0), medium)
    b = respond(fig3_params(0.0), medium)
    assert b.n.imag > a.n.imag


@pytest.mark.xfail(
    strict=True,
    reason="peak ~1.2 and gain minima ~-0.1/-0.03 with the Fig. 2 moments; see notes ledger",
)
def test_fig3_reference_magnitudes(medium):
    report = extract_features(sweep(SweepSpec(-150, 150, 3001, fig3_params(), medium)))
    x, peak = report.abs_peak
    assert -17 <= x <= 12
    assert peak == pytest.approx(2.0, abs=0.5)
    assert len(report.gain_intervals) == 2
    for _, _, m in report.gain_intervals:
        assert m == pytest.approx(-0.3, abs=0.15)
