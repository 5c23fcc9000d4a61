"""Generalized ABC-fractional calculus and fractional logistic models."""

from fraclog.errors import (
    ConfigError,
    FraclogError,
    InsufficientSamples,
    NonFiniteState,
    NotAnEquilibrium,
    SingularArgument,
    TruncationFailure,
)
from fraclog.models import (
    Cubic,
    Quadratic,
    QuadraticCapacity,
    classify_stability,
    existence_condition,
    perturbed_system,
)
from fraclog.operators import (
    SampledFunction,
    ab_integral,
    abc_derivative,
    abr_derivative,
    linear_solution,
)
from fraclog.order import FractionalOrder, coefficient_A
from fraclog.scheme import SolverConfig, Trajectory, solve_explicit, solve_pece
from fraclog.special import MLSpec, SeriesControl, ml_general

__version__ = "0.1.0"
