"""Geometric and topological bounds on dissipation in slowly driven two-level systems."""

from .bloch import (
    DissipatorParams,
    cycle_averaged_power,
    integrate_bloch,
    steady_state,
    steady_state_matrix_solve,
    toy_model_dissipation,
)
from .bounds import BoundsReport, bounds_report
from .errors import (
    ConfigError,
    DegenerateField,
    DegenerateSpectrum,
    GapClosure,
    GeodissipError,
    InvariantViolation,
    NotUnit,
    SingularMatrix,
    StepTooLarge,
    UnresolvedTopology,
)
from .geometry import chern_number, geometry_at, torus_grid
from .model import CallableModel, DriveEllipse, SpinModel, sphere_chart, sphere_cover
from .rates import Commensurate, Incommensurate, commensurate_sweep, rate_report

__version__ = "0.1.0"
