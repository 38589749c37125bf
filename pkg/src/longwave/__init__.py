"""Finite-element solver for Boussinesq-Peregrine long-wave systems."""

from . import fem, mesh, models, sparse, timestep
from .fem import Bathymetry, Discretization, FieldState, FunctionSpace
from .mesh import Triangulation, build_rectangle_mesh, import_mesh, mesh_metrics
from .models import ModelSpec, SpongeSpec, WavemakerSpec, make_model, phase_speed
from .timestep import Integrator, courant_number, rk4_step

__version__ = "0.1.0"

__all__ = [
    "Bathymetry",
    "Discretization",
    "FieldState",
    "FunctionSpace",
    "Integrator",
    "ModelSpec",
    "SpongeSpec",
    "Triangulation",
    "WavemakerSpec",
    "build_rectangle_mesh",
    "courant_number",
    "import_mesh",
    "make_model",
    "mesh_metrics",
    "phase_speed",
    "rk4_step",
    "fem",
    "mesh",
    "models",
    "sparse",
    "timestep",
]
