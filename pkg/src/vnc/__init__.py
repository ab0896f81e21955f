"""Exponential stabilization of virtual linear nonholonomic constraints."""
from .control import (ControlGain, ControlOutput, control_1d_simplified, drift_derivative_of_muhat,
                      invariance_control, stabilizing_control)
from .dynamics import Law, RhsKind, energy, rhs
from .errors import (ConfigError, DimensionMismatch, InsufficientData, MetricSingular,
                     NumericalFailure, RankDeficientConstraints, TransversalityFailure, VncError)
from .geometry import (MetricField, OneFormField, VectorFieldOnQ, christoffel, geodesic_spray,
                       grad_potential, orthogonal_projectors, sharp)
from .model import (ChartSystem, ConstraintSet, InputSet, State, c_inverse, c_matrix,
                    check_transversality, mu_hat)
from .simulation import (DecayFit, SimConfig, Trajectory, constraint_violation_norm,
                         fit_decay_rate, integrate)
from .systems import CATALOG, get_system

__version__ = "0.1.0"

__all__ = [
    "CATALOG", "ChartSystem", "ConfigError", "ConstraintSet", "ControlGain", "ControlOutput",
    "DecayFit", "DimensionMismatch", "InputSet", "InsufficientData", "Law", "MetricField",
    "MetricSingular", "NumericalFailure", "OneFormField", "RankDeficientConstraints", "RhsKind",
    "SimConfig", "State", "Trajectory", "TransversalityFailure", "VectorFieldOnQ", "VncError",
    "c_inverse", "c_matrix", "check_transversality", "christoffel", "constraint_violation_norm",
    "control_1d_simplified", "drift_derivative_of_muhat", "energy", "fit_decay_rate",
    "geodesic_spray", "get_system", "grad_potential", "integrate", "invariance_control",
    "mu_hat", "orthogonal_projectors", "rhs", "sharp", "stabilizing_control",
]
