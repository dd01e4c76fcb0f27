"""kalpha: offset, canal and translator surfaces for the K^alpha curvature flow."""
__version__ = "0.1.0"

from ._accel import backend  # noqa: E402
from .errors import *  # noqa: F401,F403,E402
from .geometry import (GridSpec, SurfaceChart, curvature_field, curvature_sample,  # noqa: E402
                       grid_parameters, plane, sample_grid, sphere, unit_normal)

__all__ = [
    "backend", "GridSpec", "SurfaceChart", "curvature_field", "curvature_sample",
    "grid_parameters", "plane", "sample_grid", "sphere", "unit_normal",
]
