"""Lagrange finite elements: spaces, quadrature, assembly, norms."""

from .assembly import (
    ErrorNorms,
    apply_dirichlet,
    assemble_directional_stiffness,
    assemble_gradient_load,
    assemble_load,
    assemble_mass_matrix,
    assemble_mass_operator,
    assemble_momentum_operator,
    assemble_weighted_stiffness,
    constrained_dofs,
    error_norms,
    integrate_field,
    l2_project,
    mass_form_applied,
    momentum_form_applied,
    scalar_values,
    vector_values,
)
from .bathymetry import Bathymetry, flat_bathymetry, linear_bathymetry
from .elements import reference_element
from .fields import Discretization, FieldState
from .quadrature import edge_rule, triangle_rule
from .spaces import FunctionSpace, evaluate_at_points, interpolate

__all__ = [
    "Bathymetry",
    "Discretization",
    "ErrorNorms",
    "FieldState",
    "FunctionSpace",
    "apply_dirichlet",
    "assemble_directional_stiffness",
    "assemble_gradient_load",
    "assemble_load",
    "assemble_mass_matrix",
    "assemble_mass_operator",
    "assemble_momentum_operator",
    "assemble_weighted_stiffness",
    "constrained_dofs",
    "edge_rule",
    "error_norms",
    "evaluate_at_points",
    "flat_bathymetry",
    "integrate_field",
    "interpolate",
    "l2_project",
    "linear_bathymetry",
    "mass_form_applied",
    "momentum_form_applied",
    "reference_element",
    "scalar_values",
    "triangle_rule",
    "vector_values",
]
