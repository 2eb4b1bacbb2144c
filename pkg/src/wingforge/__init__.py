"""wingforge: parametric wing design-space exploration and lift-to-drag
optimization."""

__version__ = "0.1.0"

from .aero import Atmosphere, InflowConditions, SurfaceField  # noqa: F401
from .doe import CaseSpec, ParameterSpace, SplitAssignment  # noqa: F401
from .geometry import MeshResolution, TriMesh, WingDesign  # noqa: F401
