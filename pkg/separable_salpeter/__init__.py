"""Bound states of the spinless Salpeter equation with separable kernels."""

from .errors import (
    ConvergenceFailure,
    InvalidIntegrand,
    InvalidParameter,
    MinimizationFailure,
    NoBoundState,
    SalpeterError,
    ThresholdViolation,
)
from .kernels import (
    Dimension,
    Exponential1D,
    Gauss3D,
    KineticForm,
    KineticVariant,
    Problem,
    SeparableTerm,
    Yamaguchi3D,
)
from .nboson import BosonSystem, critical_u, lower_bound_per_particle, upper_bound_per_particle
from .quadrature import Tolerance
from .spectral import BoundState, solve_ground_energy

__version__ = "0.1.0"
