"""Numerical topology toolkit for the Rossler system.

Subsystems: core dynamics (field, spectra, adaptive integration), the
half-plane Poincare section and its first-return map, one-dimensional
invariant manifolds with heteroclinic-trefoil diagnostics, horseshoe
symbolic dynamics with periodic-orbit solving and fixed-point indices,
and knot classification of closed orbits via Alexander polynomials and
the Lorenz 0-1 template.
"""

__version__ = "0.1.0"

from .core import (
    AssumptionReport,
    ClassicalParams,
    FixedPointAnalysis,
    Params,
    StateTransform,
    check_assumptions,
    classify_fixed_point,
    convert_classical,
    field,
    fixed_points,
    jacobian,
)
from .integrator import Trajectory, available_backends, backend_name, integrate

__all__ = [
    "__version__",
    "Params",
    "ClassicalParams",
    "StateTransform",
    "FixedPointAnalysis",
    "AssumptionReport",
    "field",
    "jacobian",
    "fixed_points",
    "classify_fixed_point",
    "check_assumptions",
    "convert_classical",
    "Trajectory",
    "integrate",
    "backend_name",
    "available_backends",
]
