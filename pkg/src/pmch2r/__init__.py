"""Rotational prescribed mean curvature surfaces in H^2 x R.

Phase-plane integration of the profile system, fate and surface
classification, surface construction in the hyperboloid model and mesh export.
"""

from importlib.metadata import PackageNotFoundError, version as _version

from .core import Equilibrium, PhaseState, PrescribedFunction, Stability, equilibrium, field, linear_law
from .integrator import (EventKind, HorizontalPlane, IntegratorConfig, Orbit, OrbitState, integrate,
                         integrate_axis, reconstruct_profile)
from .classifier import Fate, SurfaceClass, classify_axis_surface, classify_off_axis_surface, classify_orbit_fate
from .surface import SurfaceMesh, export_mesh, mean_curvature_residual, revolve, to_poincare_disk

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "Equilibrium", "PhaseState", "PrescribedFunction", "Stability", "equilibrium", "field", "linear_law",
    "EventKind", "HorizontalPlane", "IntegratorConfig", "Orbit", "OrbitState", "integrate", "integrate_axis",
    "reconstruct_profile", "Fate", "SurfaceClass", "classify_axis_surface", "classify_off_axis_surface",
    "classify_orbit_fate", "SurfaceMesh", "export_mesh", "mean_curvature_residual", "revolve", "to_poincare_disk",
]
