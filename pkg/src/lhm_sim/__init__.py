"""Steady-state optical response of a four-level Y-type atomic vapor.

Negative permittivity, permeability and refractive index with local-field
corrections, computed from the density-matrix steady state.
"""

from .calibration import CalibrationTargets, SearchGrid, calibrate_dipoles
from .config import RunConfig, load_config, parse_config
from .errors import (
    AllUndefined,
    LhmError,
    LocalFieldPole,
    NoFeasiblePoint,
    NotConverged,
    ParseError,
    SingularLiouvillian,
    UnstableStep,
    ValidationError,
    ZeroProbe,
)
from .lindblad import SystemParams, build_hamiltonian, rhs
from .response import (
    MediumParams,
    MediumResponse,
    electric_polarizability,
    magnetic_polarizability,
    permeability,
    refractive_index,
    respond,
    susceptibility_e,
)
from .steady_state import IntegratorConfig, SteadyStateResult, steady_state_integrate, steady_state_linear
from .sweep import FeatureReport, ResponseCurve, SweepSpec, extract_features, phase_scan, sweep

__version__ = "0.1.0"
