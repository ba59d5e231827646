"""Run configuration: a flat ``key = value`` text format.

Grammar, one entry per line::

    # comment                       (also allowed after a value)
    key = value

Keys are lower case and carry their unit in the name. Angles (``phi3_rad``,
``phi3_scan_rad``) take radians or exact multiples of pi such as ``pi/3``,
``4pi/3``, ``-2*pi/3``. ``phi3_scan_rad`` is a comma-separated list.
Unknown or repeated keys are errors.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .calibration import CalibrationTargets, SearchGrid
from .errors import LhmError, ParseError, ValidationError
from .lindblad import SystemParams
from .response import BOHR_MAGNETON, BRANCHES, MediumParams
from .sweep import DEFAULT_POINTS, DEFAULT_TOL_ABS, SweepSpec

FORMATS = ("csv", "json")
PRESETS = ("fig2.cfg", "fig3.cfg")

REQUIRED = (
    "omega1_over_gamma",
    "omega2_over_gamma",
    "omega3_over_gamma",
    "phi3_rad",
    "delta2_over_gamma",
    "gamma1_over_gamma",
    "gamma2_over_gamma",
    "gamma4_over_gamma",
)

DEFAULTS = {
    "delta1_over_gamma": "0",
    "delta4_over_gamma": "0",
    "gamma_scale_per_s": "1e6",
    "density_per_m3": "0.25e24",
    "d21_c_m": "2.0e-29",
    "mu42_j_per_t": repr(BOHR_MAGNETON),
    "delta1_min_over_gamma": "-150",
    "delta1_max_over_gamma": "150",
    "points": str(DEFAULT_POINTS),
    "tol_abs": repr(DEFAULT_TOL_ABS),
    "branch": "paper",
    "format": "csv",
    "output_path": "-",
    "phi3_scan_rad": ", ".join(f"{k}pi/12" for k in range(24)),
    "calib_d21_min_c_m": "2.0e-30",
    "calib_d21_max_c_m": "2.0e-28",
    "calib_mu42_min_j_per_t": "9.2740100783e-25",
    "calib_mu42_max_j_per_t": "9.2740100783e-23",
    "calib_grid_points": "9",
    "calib_target_peak_im_n": "0.65",
    "calib_target_band_over_gamma": "-100, 100",
    "calib_flank_width_over_gamma": "25",
}

KNOWN_KEYS = frozenset(REQUIRED) | frozenset(DEFAULTS)

_ANGLE = re.compile(
    r"^(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?$"
)


def parse_angle(text: str) -> float:
    """Radians from a float literal or a pi form like ``4pi/3``."""
    text = text.strip()
    m = _ANGLE.match(text)
    if m:
        num = float(m.group("num")) if m.group("num") else 1.0
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0:
            raise ValueError("zero denominator")
        value = num * math.pi / den
        return -value if m.group("sign") == "-" else value
    return float(text)


@dataclass(frozen=True)
class RunConfig:
    system: SystemParams
    medium: MediumParams
    delta1_min: float
    delta1_max: float
    points: int
    tol_abs: float
    branch: str
    output_path: str
    format: str
    phi3_scan: tuple[float, ...]
    search: SearchGrid = field(default_factory=SearchGrid)
    targets: CalibrationTargets = field(default_factory=CalibrationTargets)

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(
            self.delta1_min, self.delta1_max, self.points, self.system, self.medium, self.branch
        )


def _read_pairs(text: str) -> dict[str, tuple[str, int]]:
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("missing key", line=lineno)
        if key not in KNOWN_KEYS:
            raise ParseError("unknown key", line=lineno, key=key)
        if key in pairs:
            raise ParseError(f"duplicate key (first on line {pairs[key][1]})", line=lineno, key=key)
        if not value:
            raise ParseError("missing value", line=lineno, key=key)
        pairs[key] = (value, lineno)
    return pairs


def parse_config(text: str) -> RunConfig:
    pairs = _read_pairs(text)
    missing = [k for k in REQUIRED if k not in pairs]
    if missing:
        raise ValidationError(f"missing required keys: {', '.join(missing)}")
    raw = {k: v for k, (v, _) in pairs.items()}
    lines = {k: n for k, (_, n) in pairs.items()}
    for k, v in DEFAULTS.items():
        raw.setdefault(k, v)

    def convert(key, fn):
        try:
            return fn(raw[key])
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad value {raw[key]!r}: {exc}", line=lines.get(key), key=key) from None

    num = lambda key: convert(key, float)  # noqa: E731
    angles = lambda s: tuple(parse_angle(part) for part in s.split(","))  # noqa: E731

    branch = raw["branch"]
    if branch not in BRANCHES:
        raise ValidationError(f"branch must be one of {BRANCHES}, got {branch!r}")
    fmt = raw["format"]
    if fmt not in FORMATS:
        raise ValidationError(f"format must be one of {FORMATS}, got {fmt!r}")
    band = convert("calib_target_band_over_gamma", lambda s: tuple(float(v) for v in s.split(",")))
    if len(band) != 2 or not band[0] < band[1]:
        raise ValidationError("calib_target_band_over_gamma must be 'lo, hi' with lo < hi")
    tol_abs = num("tol_abs")
    if not tol_abs > 0:
        raise ValidationError(f"tol_abs must be > 0, got {tol_abs}")

    system = SystemParams(
        omega1=num("omega1_over_gamma"),
        omega2=num("omega2_over_gamma"),
        omega3=num("omega3_over_gamma"),
        phi3=convert("phi3_rad", parse_angle),
        delta1=num("delta1_over_gamma"),
        delta2=num("delta2_over_gamma"),
        gamma1=num("gamma1_over_gamma"),
        gamma2=num("gamma2_over_gamma"),
        gamma4=num("gamma4_over_gamma"),
        delta4=num("delta4_over_gamma"),
        gamma_scale=num("gamma_scale_per_s"),
    )
    medium = MediumParams(num("density_per_m3"), num("d21_c_m"), num("mu42_j_per_t"))
    cfg = RunConfig(
        system=system,
        medium=medium,
        delta1_min=num("delta1_min_over_gamma"),
        delta1_max=num("delta1_max_over_gamma"),
        points=convert("points", int),
        tol_abs=tol_abs,
        branch=branch,
        output_path=raw["output_path"],
        format=fmt,
        phi3_scan=convert("phi3_scan_rad", angles),
        search=SearchGrid(
            d21_range=(num("calib_d21_min_c_m"), num("calib_d21_max_c_m")),
            mu42_range=(num("calib_mu42_min_j_per_t"), num("calib_mu42_max_j_per_t")),
            points=convert("calib_grid_points", int),
        ),
        targets=CalibrationTargets(
            peak_value=num("calib_target_peak_im_n"),
            neg_band=band,
            flank_width=num("calib_flank_width_over_gamma"),
            tol_abs=tol_abs,
        ),
    )
    cfg.sweep_spec()  # validates the sweep fields
    return cfg


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise LhmError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("lhm_sim.presets").joinpath(name).read_text(encoding="utf-8")


def load_config(path: str | Path) -> RunConfig:
    """Parse a config file; a bare preset name falls back to the bundled copy."""
    p = Path(path)
    if p.is_file():
        return parse_config(p.read_text(encoding="utf-8"))
    if p.name == str(path) and p.name in PRESETS:
        return parse_config(preset_text(p.name))
    raise FileNotFoundError(f"config file not found: {path}")
